//! n-dimensional rotation/shift machinery and the conversion from rotation
//! parameters to hyperplane coefficient vectors.
//!
//! Conventions used throughout the crate:
//!
//! * Axis indices are 1-based. Axes `1..=n-1` are the independent directions
//!   `x_1..x_{n-1}`; axis `n` is the dependent `y` direction.
//! * A basic rotation acts in the plane spanned by one pair of basis vectors.
//!   In `n` dimensions there are `C(n,2)` of them.
//! * Composed rotations are applied intrinsically: the rotation matrices act
//!   in the basis' own column space, so a rotation in plane `(2,3)` never
//!   moves the first basis vector regardless of prior rotations.
//! * The composition order is the lexicographic order of the plane index
//!   pairs, multiplied on the left in sequence. The order is a fixed
//!   convention of this crate; fits and serialized models depend on it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const ORTHONORMALITY_TOL: f64 = 1e-10;
/// A model plane whose normalized y coefficient falls below this is vertical
/// in y and cannot be evaluated as a function of x.
const VERTICAL_TOL: f64 = 1e-10;

/// An orthonormal basis of n-space together with an origin point.
///
/// The columns of `vectors` are the basis vectors `x_1..x_{n-1}, y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    vectors: DMatrix<f64>,
    origin: DVector<f64>,
}

impl Basis {
    /// The identity basis at the origin of n-space.
    pub fn identity(n: usize) -> Basis {
        Basis {
            vectors: DMatrix::identity(n, n),
            origin: DVector::zeros(n),
        }
    }

    /// Builds a basis from explicit columns, validating orthonormality and a
    /// determinant of +1 (proper rotation) within 1e-10.
    pub fn new(vectors: DMatrix<f64>, origin: DVector<f64>) -> Result<Basis> {
        if !vectors.is_square() || vectors.nrows() != origin.len() {
            return Err(Error::Parameter(format!(
                "basis matrix must be square and match the origin length, got {}x{} and {}",
                vectors.nrows(),
                vectors.ncols(),
                origin.len()
            )));
        }
        let n = vectors.nrows();
        let gram = vectors.transpose() * &vectors;
        let identity = DMatrix::<f64>::identity(n, n);
        let max_dev = (&gram - &identity).abs().max();
        if max_dev > ORTHONORMALITY_TOL {
            return Err(Error::Parameter(format!(
                "basis columns are not orthonormal (max deviation {max_dev:.3e})"
            )));
        }
        let det = vectors.determinant();
        if (det - 1.0).abs() > ORTHONORMALITY_TOL {
            return Err(Error::Parameter(format!(
                "basis determinant is {det:.12}, expected +1"
            )));
        }
        Ok(Basis { vectors, origin })
    }

    fn from_parts(vectors: DMatrix<f64>, origin: DVector<f64>) -> Basis {
        Basis { vectors, origin }
    }

    pub fn dimension(&self) -> usize {
        self.origin.len()
    }

    /// The i-th basis vector (1-based; axis `n` is the y direction).
    pub fn axis(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i - 1).into_owned()
    }

    pub fn origin(&self) -> &DVector<f64> {
        &self.origin
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Returns the same basis translated to a new origin.
    pub fn with_origin(&self, origin: DVector<f64>) -> Basis {
        Basis {
            vectors: self.vectors.clone(),
            origin,
        }
    }
}

/// A hyperplane in n-space stored as the `n+1` coefficients `a` of its
/// equation `[1, p] . a = 0`, with `a_0` the offset, `a_1..a_{n-1}` the
/// coefficients on `x_j` and `a_n` the coefficient on `y`.
///
/// The coefficient sub-vector `(a_1..a_n)` is kept at unit Euclidean norm, so
/// `[1, p] . a` is the signed Euclidean distance of `p` from the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    coefs: Vec<f64>,
}

impl Hyperplane {
    /// Builds a hyperplane from raw coefficients, normalizing `(a_1..a_n)` to
    /// unit norm.
    pub fn from_coefs(coefs: Vec<f64>) -> Result<Hyperplane> {
        if coefs.len() < 3 {
            return Err(Error::Parameter(format!(
                "hyperplane needs at least 3 coefficients, got {}",
                coefs.len()
            )));
        }
        let norm = coefs[1..].iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::DegeneratePlane(
                "all direction coefficients are zero".into(),
            ));
        }
        Ok(Hyperplane {
            coefs: coefs.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Builds the plane of the graph `y = intercept + slopes . x`, oriented
    /// with a positive y coefficient.
    pub fn from_affine(intercept: f64, slopes: &[f64]) -> Hyperplane {
        let mut coefs = Vec::with_capacity(slopes.len() + 2);
        coefs.push(intercept);
        coefs.extend(slopes.iter().copied());
        coefs.push(-1.0);
        let mut plane = Hyperplane::from_coefs(coefs).expect("affine plane is never degenerate");
        plane.negate();
        plane
    }

    pub fn coefs(&self) -> &[f64] {
        &self.coefs
    }

    /// The space dimension n (one less than the coefficient count).
    pub fn dimension(&self) -> usize {
        self.coefs.len() - 1
    }

    pub fn offset(&self) -> f64 {
        self.coefs[0]
    }

    /// The coefficient on y, `a_n`.
    pub fn y_coef(&self) -> f64 {
        self.coefs[self.coefs.len() - 1]
    }

    /// Signed residual `[1, p] . a` of a full n-space point.
    pub fn residual(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len() + 1, self.coefs.len());
        let mut acc = self.coefs[0];
        for (c, p) in self.coefs[1..].iter().zip(point) {
            acc += c * p;
        }
        acc
    }

    fn negate(&mut self) {
        for c in &mut self.coefs {
            *c = -*c;
        }
    }
}

/// Ordered list of basic rotation planes `(j,k)`, `lo <= j < k <= hi`,
/// in lexicographic order (1-based axis indices).
pub fn rotation_planes_among(lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let mut planes = Vec::new();
    for j in lo..=hi {
        for k in (j + 1)..=hi {
            planes.push((j, k));
        }
    }
    planes
}

/// The `C(n,2)` basic rotation planes of n-space in lexicographic order.
pub fn basic_rotation_planes(n: usize) -> Result<Vec<(usize, usize)>> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "rotations need at least 2 dimensions, got {n}"
        )));
    }
    Ok(rotation_planes_among(1, n))
}

/// Basic rotation matrix in plane `(j,k)` (1-based), rotating axis j toward
/// axis k by `angle`.
fn basic_rotation(n: usize, plane: (usize, usize), angle: f64) -> DMatrix<f64> {
    let (j, k) = (plane.0 - 1, plane.1 - 1);
    let (s, c) = angle.sin_cos();
    let mut g = DMatrix::<f64>::identity(n, n);
    g[(j, j)] = c;
    g[(j, k)] = -s;
    g[(k, j)] = s;
    g[(k, k)] = c;
    g
}

/// Rotates a basis intrinsically by the given angles in the given planes.
///
/// The rotations compose left-to-right over the listed order and act in the
/// basis' own column space: the result is `B . (G_m ... G_1)`. The origin is
/// unchanged.
pub fn rotate(basis: &Basis, angles: &[f64], planes: &[(usize, usize)]) -> Result<Basis> {
    if angles.len() != planes.len() {
        return Err(Error::Parameter(format!(
            "got {} angles for {} rotation planes",
            angles.len(),
            planes.len()
        )));
    }
    let n = basis.dimension();
    for &(j, k) in planes {
        if j == 0 || k == 0 || j >= k || k > n {
            return Err(Error::Parameter(format!(
                "rotation plane ({j},{k}) is not a valid axis pair for dimension {n}"
            )));
        }
    }
    let mut composed = DMatrix::<f64>::identity(n, n);
    for (&angle, &plane) in angles.iter().zip(planes) {
        if angle != 0.0 {
            composed = basic_rotation(n, plane, angle) * composed;
        }
    }
    Ok(Basis::from_parts(
        &basis.vectors * composed,
        basis.origin.clone(),
    ))
}

/// Hyperplane coefficients from a normal vector and a point on the plane:
/// `a = (1/|nu|) [-o^T nu, nu_1, ..., nu_n]^T`.
pub fn plane_coefficients(normal: &DVector<f64>, origin: &DVector<f64>) -> Result<Hyperplane> {
    let norm = normal.norm();
    if norm == 0.0 {
        return Err(Error::DegeneratePlane("zero normal vector".into()));
    }
    let mut coefs = Vec::with_capacity(normal.len() + 1);
    coefs.push(-origin.dot(normal) / norm);
    coefs.extend(normal.iter().map(|v| v / norm));
    Ok(Hyperplane { coefs })
}

/// Plane coefficients for a model hyperplane: same as [`plane_coefficients`]
/// but oriented so the y coefficient is positive, and rejected as degenerate
/// when the plane is vertical in y.
pub fn model_plane_coefficients(
    normal: &DVector<f64>,
    origin: &DVector<f64>,
) -> Result<Hyperplane> {
    let mut plane = plane_coefficients(normal, origin)?;
    let y_coef = plane.y_coef();
    if y_coef.abs() <= VERTICAL_TOL {
        return Err(Error::DegeneratePlane(format!(
            "model plane is vertical in y (a_n = {y_coef:.3e})"
        )));
    }
    if y_coef < 0.0 {
        plane.negate();
    }
    Ok(plane)
}

/// Per-pair rotation/shift parameters: the rotation of the intersection
/// basis within the interface, the shift to the intersection hyperline, and
/// the two final tilts on either side of the interface.
#[derive(Debug, Clone, PartialEq)]
pub struct PairParams {
    /// `C(n-1,2)` angles for the rotation planes among axes `{2..n}`.
    pub r2: Vec<f64>,
    /// Shift distance along the rotated y axis.
    pub s2: f64,
    /// Tilt in the `(1,n)` plane for the plane below the interface.
    pub r3_minus: f64,
    /// Tilt in the `(1,n)` plane for the plane above the interface.
    pub r3_plus: f64,
}

/// The full rotation/shift parameter set that generates a piecewise-convex
/// model: one global rotation + shift fixing the interface, then one
/// [`PairParams`] per plane pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationParams {
    /// `C(n,2)` angles of the initial rotation (radians).
    pub r1: Vec<f64>,
    /// Shift distance along the rotated first axis.
    pub s1: f64,
    pub pairs: Vec<PairParams>,
}

impl RotationParams {
    /// All-zero parameters for `n_hyp/2` pairs in n dimensions: both plane
    /// families start horizontal and the interface is the plane normal to
    /// `x_1` through the origin.
    pub fn zeros(n: usize, n_pairs: usize) -> RotationParams {
        let r1_len = rotation_planes_among(1, n).len();
        let r2_len = rotation_planes_among(2, n).len();
        RotationParams {
            r1: vec![0.0; r1_len],
            s1: 0.0,
            pairs: (0..n_pairs)
                .map(|_| PairParams {
                    r2: vec![0.0; r2_len],
                    s2: 0.0,
                    r3_minus: 0.0,
                    r3_plus: 0.0,
                })
                .collect(),
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Validates the vector lengths against dimension n.
    pub fn check_dimension(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!(
                "piecewise models need n >= 2, got {n}"
            )));
        }
        let r1_len = rotation_planes_among(1, n).len();
        if self.r1.len() != r1_len {
            return Err(Error::Parameter(format!(
                "r1 has {} angles, dimension {n} needs {r1_len}",
                self.r1.len()
            )));
        }
        let r2_len = rotation_planes_among(2, n).len();
        for (i, pair) in self.pairs.iter().enumerate() {
            if pair.r2.len() != r2_len {
                return Err(Error::Parameter(format!(
                    "pair {i} has {} r2 angles, dimension {n} needs {r2_len}",
                    pair.r2.len()
                )));
            }
        }
        if self.pairs.is_empty() {
            return Err(Error::Parameter("at least one plane pair required".into()));
        }
        Ok(())
    }
}

/// Output of [`params_to_hyperplanes`]: the plane families on either side of
/// the interface plus the interface itself.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSet {
    pub lower: Vec<Hyperplane>,
    pub upper: Vec<Hyperplane>,
    pub interface: Hyperplane,
}

/// Converts rotation parameters to hyperplane coefficient vectors.
///
/// The construction guarantees continuity: each returned pair
/// `(lower_i, upper_i)` meets exactly on an intersection hyperline that lies
/// in the interface, because the final tilts act only in the `(x_1, y)` plane
/// of the intersection basis.
pub fn params_to_hyperplanes(params: &RotationParams, n: usize) -> Result<PlaneSet> {
    params.check_dimension(n)?;
    let initial_planes = rotation_planes_among(1, n);
    let pair_planes = rotation_planes_among(2, n);
    let tilt_plane = [(1, n)];

    let base = rotate(&Basis::identity(n), &params.r1, &initial_planes)?;
    let interface_normal = base.axis(1);
    let origin = &interface_normal * params.s1;
    let interface = plane_coefficients(&interface_normal, &origin)?;
    let base = base.with_origin(origin);

    let mut lower = Vec::with_capacity(params.pairs.len());
    let mut upper = Vec::with_capacity(params.pairs.len());
    for (i, pair) in params.pairs.iter().enumerate() {
        let pair_basis = rotate(&base, &pair.r2, &pair_planes)?;
        let pair_origin = pair_basis.origin() + pair_basis.axis(n) * pair.s2;

        let minus = rotate(&pair_basis, &[pair.r3_minus], &tilt_plane)?;
        lower.push(
            model_plane_coefficients(&minus.axis(n), &pair_origin).map_err(|e| {
                Error::DegenerateModel {
                    pair: i,
                    detail: e.to_string(),
                }
            })?,
        );

        let plus = rotate(&pair_basis, &[pair.r3_plus], &tilt_plane)?;
        upper.push(
            model_plane_coefficients(&plus.axis(n), &pair_origin).map_err(|e| {
                Error::DegenerateModel {
                    pair: i,
                    detail: e.to_string(),
                }
            })?,
        );
    }
    Ok(PlaneSet {
        lower,
        upper,
        interface,
    })
}

/// Angles that align the given 1-based axis of the identity basis with a
/// target direction, using only the listed rotation planes.
///
/// Returns one angle per plane (zero for planes that do not involve `axis`)
/// such that `rotate(identity, angles, planes)` maps `e_axis` onto
/// `target / |target|`. The planes must cover every nonzero component of the
/// target.
pub fn axis_alignment_angles(
    target: &DVector<f64>,
    axis: usize,
    planes: &[(usize, usize)],
) -> Result<Vec<f64>> {
    let norm = target.norm();
    if norm == 0.0 {
        return Err(Error::Parameter("cannot align with a zero vector".into()));
    }
    let mut v: DVector<f64> = target / norm;
    let mut angles = vec![0.0; planes.len()];
    // Undo the composition right-to-left: zero each non-axis component into
    // the axis component, keeping it non-negative.
    for (slot, &(j, k)) in angles.iter_mut().zip(planes).rev() {
        if j != axis && k != axis {
            continue;
        }
        let other = if j == axis { k } else { j };
        let va = v[axis - 1];
        let vo = v[other - 1];
        let r = va.hypot(vo);
        if r == 0.0 {
            continue;
        }
        let theta = if j == axis {
            // Plane (axis, other): forward rotation moves e_axis toward e_other.
            vo.atan2(va)
        } else {
            // Plane (other, axis): forward rotation moves e_other toward e_axis.
            (-vo).atan2(va)
        };
        *slot = theta;
        v[axis - 1] = r;
        v[other - 1] = 0.0;
    }
    let residual: f64 = v
        .iter()
        .enumerate()
        .map(|(i, &c)| if i == axis - 1 { (c - 1.0).abs() } else { c.abs() })
        .fold(0.0, f64::max);
    if residual > 1e-9 {
        return Err(Error::Parameter(format!(
            "rotation planes cannot align axis {axis} with the target (residual {residual:.3e})"
        )));
    }
    Ok(angles)
}
