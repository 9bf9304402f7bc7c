//! Simple convex/concave approximation: a data set approximated by the max
//! (or min) of a set of hyperplanes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::Hyperplane;
use crate::optimizer::{minimize, OptimizerOptions};

/// Whether a plane family approximates from below (max) or above (min).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Estimate is the max of the plane values.
    Convex,
    /// Estimate is the min of the plane values.
    Concave,
}

impl Orientation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Orientation::Convex => "convex",
            Orientation::Concave => "concave",
        }
    }

    pub fn parse(s: &str) -> Result<Orientation> {
        match s {
            "convex" => Ok(Orientation::Convex),
            "concave" => Ok(Orientation::Concave),
            other => Err(Error::Format(format!("unknown orientation '{other}'"))),
        }
    }
}

/// A max-of-hyperplanes (or min-of-hyperplanes) model, together with the
/// domain box it was fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexModel {
    planes: Vec<Hyperplane>,
    orientation: Orientation,
    dimension: usize,
    x_bounds: Vec<(f64, f64)>,
    y_bounds: (f64, f64),
}

impl ConvexModel {
    pub fn new(
        planes: Vec<Hyperplane>,
        orientation: Orientation,
        x_bounds: Vec<(f64, f64)>,
        y_bounds: (f64, f64),
    ) -> Result<ConvexModel> {
        if planes.is_empty() {
            return Err(Error::Parameter("model needs at least one plane".into()));
        }
        let dimension = x_bounds.len() + 1;
        for plane in &planes {
            if plane.dimension() != dimension {
                return Err(Error::Parameter(format!(
                    "plane dimension {} does not match model dimension {dimension}",
                    plane.dimension()
                )));
            }
            if plane.y_coef() <= 0.0 {
                return Err(Error::DegeneratePlane(
                    "model planes must have a positive y coefficient".into(),
                ));
            }
        }
        Ok(ConvexModel {
            planes,
            orientation,
            dimension,
            x_bounds,
            y_bounds,
        })
    }

    pub fn planes(&self) -> &[Hyperplane] {
        &self.planes
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Full space dimension n.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn x_bounds(&self) -> &[(f64, f64)] {
        &self.x_bounds
    }

    pub fn y_bounds(&self) -> (f64, f64) {
        self.y_bounds
    }
}

/// The y-value of one hyperplane at x: the root of `[1, x, y] . a = 0`.
pub fn plane_value(plane: &Hyperplane, x: &[f64]) -> Result<f64> {
    if x.len() + 2 != plane.coefs().len() {
        return Err(Error::Parameter(format!(
            "point has {} coordinates, plane expects {}",
            x.len(),
            plane.coefs().len() - 2
        )));
    }
    let a = plane.coefs();
    let a_n = plane.y_coef();
    if a_n.abs() < 1e-12 {
        return Err(Error::DegeneratePlane(
            "plane is vertical in y; it has no y value".into(),
        ));
    }
    let mut acc = a[0];
    for (c, v) in a[1..a.len() - 1].iter().zip(x) {
        acc += c * v;
    }
    Ok(-acc / a_n)
}

pub(crate) fn plane_value_unchecked(plane: &Hyperplane, x: &[f64]) -> f64 {
    let a = plane.coefs();
    let mut acc = a[0];
    for (c, v) in a[1..a.len() - 1].iter().zip(x) {
        acc += c * v;
    }
    -acc / plane.y_coef()
}

/// Evaluates the model at x: max of the plane values for convex orientation,
/// min for concave.
pub fn evaluate_convex(model: &ConvexModel, x: &[f64]) -> f64 {
    let values = model.planes.iter().map(|p| plane_value_unchecked(p, x));
    match model.orientation {
        Orientation::Convex => values.fold(f64::NEG_INFINITY, f64::max),
        Orientation::Concave => values.fold(f64::INFINITY, f64::min),
    }
}

/// Affine plane parameters `y = intercept + slopes . x` used during search.
/// The normalized (n+1)-coefficient form has a scale redundancy that stalls
/// derivative-free search, so fitting runs on this form.
#[derive(Clone)]
struct AffinePlanes {
    n_hyp: usize,
    x_dim: usize,
}

impl AffinePlanes {
    fn unpack<'a>(&self, theta: &'a [f64]) -> impl Iterator<Item = (f64, &'a [f64])> + 'a {
        let x_dim = self.x_dim;
        theta
            .chunks_exact(x_dim + 1)
            .map(move |chunk| (chunk[0], &chunk[1..]))
    }

    fn value(intercept: f64, slopes: &[f64], x: &[f64]) -> f64 {
        intercept + slopes.iter().zip(x).map(|(s, v)| s * v).sum::<f64>()
    }

    fn max_value(&self, theta: &[f64], x: &[f64]) -> f64 {
        self.unpack(theta)
            .map(|(b0, b)| Self::value(b0, b, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn len(&self) -> usize {
        self.n_hyp * (self.x_dim + 1)
    }
}

/// Sum of squared errors of the max-of-affine-planes estimate over the data.
fn sse(layout: &AffinePlanes, theta: &[f64], data: &Dataset) -> f64 {
    data.points()
        .iter()
        .map(|(x, y)| {
            let e = layout.max_value(theta, x) - y;
            e * e
        })
        .sum()
}

/// Anti-domination penalty: each plane is driven up toward the data maximum
/// at its nearest domain corner so that no plane stays dominated everywhere.
/// The weight keeps the term well below the squared-error sum at convergence.
fn corner_penalty(
    layout: &AffinePlanes,
    theta: &[f64],
    corners: &[Vec<f64>],
    y_max: f64,
    n_data: usize,
) -> f64 {
    let weight = 1e-3 * n_data as f64;
    let mut total = 0.0;
    for (b0, b) in layout.unpack(theta) {
        let shortfall = corners
            .iter()
            .map(|c| (y_max - AffinePlanes::value(b0, b, c)).max(0.0))
            .fold(f64::INFINITY, f64::min);
        total += shortfall * shortfall;
    }
    weight * total
}

/// Global least-squares affine fit `y ~ b0 + b . x` via the normal equations.
fn linear_least_squares(data: &Dataset) -> Vec<f64> {
    let x_dim = data.x_dim();
    let k = x_dim + 1;
    let mut ata = nalgebra::DMatrix::<f64>::zeros(k, k);
    let mut aty = nalgebra::DVector::<f64>::zeros(k);
    for (x, y) in data.points() {
        let mut row = Vec::with_capacity(k);
        row.push(1.0);
        row.extend_from_slice(x);
        for i in 0..k {
            aty[i] += row[i] * y;
            for j in 0..k {
                ata[(i, j)] += row[i] * row[j];
            }
        }
    }
    match ata.lu().solve(&aty) {
        Some(sol) => sol.iter().copied().collect(),
        // Rank-deficient data: fall back to a flat plane at the mean.
        None => {
            let mean = data.points().iter().map(|(_, y)| y).sum::<f64>() / data.len() as f64;
            let mut sol = vec![0.0; k];
            sol[0] = mean;
            sol
        }
    }
}

pub(crate) fn convex_fit_objective(
    layout_n_hyp: usize,
    data: &Dataset,
) -> impl Fn(&[f64]) -> f64 + '_ {
    let layout = AffinePlanes {
        n_hyp: layout_n_hyp,
        x_dim: data.x_dim(),
    };
    let corners = data.domain_corners();
    let y_max = data.y_bounds().1;
    let n_data = data.len();
    move |theta: &[f64]| {
        sse(&layout, theta, data) + corner_penalty(&layout, theta, &corners, y_max, n_data)
    }
}

/// Fits a simple convex (or concave) model by least squares.
///
/// Concave fits run as convex fits of the negated data; the resulting models
/// map onto each other by negating every coefficient except the one on y.
/// The reported RMSE excludes the anti-domination penalty.
pub fn fit_convex(
    data: &Dataset,
    n_hyp: usize,
    orientation: Orientation,
    options: &OptimizerOptions,
    seed: u64,
) -> Result<(ConvexModel, f64)> {
    if n_hyp == 0 {
        return Err(Error::Parameter("at least one plane required".into()));
    }
    let needed = n_hyp * (data.dimension() + 1);
    if data.len() < needed {
        return Err(Error::Underdetermined {
            needed,
            got: data.len(),
        });
    }
    if orientation == Orientation::Concave {
        let negated = negate_dataset(data)?;
        let (model, rmse) = fit_convex(&negated, n_hyp, Orientation::Convex, options, seed)?;
        let planes = model
            .planes
            .iter()
            .map(|p| {
                let a = p.coefs();
                let x_dim = data.x_dim();
                let slopes: Vec<f64> = a[1..=x_dim].iter().map(|c| c / a[a.len() - 1]).collect();
                let intercept = a[0] / a[a.len() - 1];
                // y = -(intercept + slopes.x) for the negated fit; flip back.
                Hyperplane::from_affine(intercept, &slopes)
            })
            .collect();
        let model = ConvexModel::new(
            planes,
            Orientation::Concave,
            data.x_bounds().to_vec(),
            data.y_bounds(),
        )?;
        return Ok((model, rmse));
    }

    let layout = AffinePlanes {
        n_hyp,
        x_dim: data.x_dim(),
    };
    let theta0 = initial_planes(data, n_hyp, seed);
    debug_assert_eq!(theta0.len(), layout.len());
    let objective = convex_fit_objective(n_hyp, data);
    let result = minimize(|theta| objective(theta), &theta0, options)?;

    let planes: Vec<Hyperplane> = layout
        .unpack(&result.x)
        .map(|(b0, b)| Hyperplane::from_affine(b0, b))
        .collect();
    let model = ConvexModel::new(
        planes,
        Orientation::Convex,
        data.x_bounds().to_vec(),
        data.y_bounds(),
    )?;
    let rmse = (sse(&layout, &result.x, data) / data.len() as f64).sqrt();
    Ok((model, rmse))
}

/// Each plane starts at the global least-squares fit with seeded slope
/// perturbations (about 10% of the y range across the domain), rotated about
/// the domain center so the planes stay near the data.
fn initial_planes(data: &Dataset, n_hyp: usize, seed: u64) -> Vec<f64> {
    let base = linear_least_squares(data);
    let x_dim = data.x_dim();
    let y_range = data.y_range();
    let center: Vec<f64> = data
        .x_bounds()
        .iter()
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut theta = Vec::with_capacity(n_hyp * (x_dim + 1));
    for _ in 0..n_hyp {
        let mut intercept = base[0];
        let mut slopes = base[1..].to_vec();
        for (j, slope) in slopes.iter_mut().enumerate() {
            let (lo, hi) = data.x_bounds()[j];
            let magnitude = 0.1 * y_range / (hi - lo);
            let delta = rng.random_range(-magnitude..=magnitude);
            *slope += delta;
            intercept -= delta * center[j];
        }
        theta.push(intercept);
        theta.extend(slopes);
    }
    theta
}

fn negate_dataset(data: &Dataset) -> Result<Dataset> {
    let points = data
        .points()
        .iter()
        .map(|(x, y)| (x.clone(), -y))
        .collect();
    let (ylo, yhi) = data.y_bounds();
    Dataset::with_bounds(points, data.x_bounds().to_vec(), (-yhi, -ylo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(coefs: &[f64]) -> Hyperplane {
        Hyperplane::from_coefs(coefs.to_vec()).unwrap()
    }

    #[test]
    fn plane_value_examples() {
        assert_eq!(
            plane_value(&plane(&[0.0, 0.0, 0.0, 1.0]), &[0.3, 0.7]).unwrap(),
            0.0
        );
        assert_eq!(
            plane_value(&plane(&[-1.0, 0.0, 0.0, 1.0]), &[5.0, -3.0]).unwrap(),
            1.0
        );
        let p = plane(&[0.0, -1.0, -1.0, 1.0]);
        let y = plane_value(&p, &[0.2, 0.5]).unwrap();
        assert!((y - 0.7).abs() < 1e-12);
        // The returned y is a root of the plane equation.
        assert!(p.residual(&[0.2, 0.5, y]).abs() < 1e-12);
    }

    #[test]
    fn vertical_plane_has_no_value() {
        let p = plane(&[0.3, 1.0, 1.0, 0.0]);
        assert!(matches!(
            plane_value(&p, &[0.0, 0.0]),
            Err(Error::DegeneratePlane(_))
        ));
    }

    fn two_line_model(orientation: Orientation) -> ConvexModel {
        let planes = vec![
            Hyperplane::from_affine(0.0, &[1.0]),
            Hyperplane::from_affine(1.0, &[-1.0]),
        ];
        ConvexModel::new(planes, orientation, vec![(0.0, 1.0)], (0.0, 1.0)).unwrap()
    }

    #[test]
    fn evaluate_single_plane_equals_plane_value() {
        let p = Hyperplane::from_affine(0.25, &[2.0, -1.0]);
        let model = ConvexModel::new(
            vec![p.clone()],
            Orientation::Convex,
            vec![(0.0, 1.0), (0.0, 1.0)],
            (0.0, 1.0),
        )
        .unwrap();
        let x = [0.4, 0.9];
        assert_eq!(evaluate_convex(&model, &x), plane_value(&p, &x).unwrap());
    }

    #[test]
    fn evaluate_max_and_min_of_two_lines() {
        let convex = two_line_model(Orientation::Convex);
        assert!((evaluate_convex(&convex, &[0.25]) - 0.75).abs() < 1e-12);
        let concave = two_line_model(Orientation::Concave);
        assert!((evaluate_convex(&concave, &[0.25]) - 0.25).abs() < 1e-12);
    }

    fn grid_dataset(g: usize, f: impl Fn(f64, f64) -> f64) -> Dataset {
        let mut points = Vec::new();
        let step = 1.0 / (g - 1) as f64;
        for i in 0..g {
            for j in 0..g {
                let x1 = i as f64 * step;
                let x2 = j as f64 * step;
                points.push((vec![x1, x2], f(x1, x2)));
            }
        }
        Dataset::from_points(points).unwrap()
    }

    #[test]
    fn exact_linear_recovery() {
        let data = grid_dataset(6, |x1, x2| 2.0 * x1 + 3.0 * x2 + 1.0);
        let opts = OptimizerOptions::for_dimension(3);
        let (model, rmse) = fit_convex(&data, 1, Orientation::Convex, &opts, 0).unwrap();
        assert!(rmse < 1e-6, "rmse {rmse}");
        assert_eq!(model.planes().len(), 1);
    }

    #[test]
    fn two_piece_absolute_value_is_exact() {
        // y = |x1 - 0.5| is exactly the max of the planes +-(x1 - 0.5).
        let points: Vec<(Vec<f64>, f64)> = (0..101)
            .map(|i| {
                let x = i as f64 / 100.0;
                (vec![x], (x - 0.5).abs())
            })
            .collect();
        let data = Dataset::from_points(points).unwrap();
        let oracle_planes = [
            Hyperplane::from_affine(-0.5, &[1.0]),
            Hyperplane::from_affine(0.5, &[-1.0]),
        ];
        let oracle = ConvexModel::new(
            oracle_planes.to_vec(),
            Orientation::Convex,
            data.x_bounds().to_vec(),
            data.y_bounds(),
        )
        .unwrap();
        let oracle_rmse = {
            let sse: f64 = data
                .points()
                .iter()
                .map(|(x, y)| (evaluate_convex(&oracle, x) - y).powi(2))
                .sum();
            (sse / data.len() as f64).sqrt()
        };
        assert!(oracle_rmse < 1e-12);

        let opts = OptimizerOptions::for_dimension(4).with_restarts(3);
        let (_, rmse) = fit_convex(&data, 2, Orientation::Convex, &opts, 1).unwrap();
        assert!(rmse < 1e-6, "rmse {rmse}");
    }

    #[test]
    fn multiplication_grid_plateau() {
        let data = Dataset::multiplication_grid(100).unwrap();
        let opts = OptimizerOptions::for_dimension(6).with_restarts(2);
        let (_, rmse) = fit_convex(&data, 2, Orientation::Convex, &opts, 0).unwrap();
        assert!(
            (0.030..=0.060).contains(&rmse),
            "2-plane rmse {rmse} outside the expected plateau"
        );
    }

    #[test]
    fn estimate_dominates_every_plane() {
        let data = grid_dataset(20, |x1, x2| x1 * x1 + x2 * x2);
        let opts = OptimizerOptions::for_dimension(9);
        let (model, _) = fit_convex(&data, 3, Orientation::Convex, &opts, 2).unwrap();
        for (x, _) in data.points() {
            let est = evaluate_convex(&model, x);
            for p in model.planes() {
                assert!(est >= plane_value(p, x).unwrap());
            }
        }
    }

    #[test]
    fn rmse_non_increasing_for_convex_data() {
        let data = grid_dataset(25, |x1, x2| x1 * x1 + x2 * x2);
        let mut last = f64::INFINITY;
        for n_hyp in 1..=6 {
            let opts = OptimizerOptions::for_dimension(n_hyp * 3).with_restarts(3);
            let (_, rmse) = fit_convex(&data, n_hyp, Orientation::Convex, &opts, 7).unwrap();
            assert!(
                rmse <= last + 1e-9,
                "rmse increased from {last} to {rmse} at {n_hyp} planes"
            );
            last = rmse;
        }
    }

    #[test]
    fn concave_fit_mirrors_convex_fit_of_negated_data() {
        let data = grid_dataset(15, |x1, x2| -(x1 * x1) - 0.5 * x2 + 0.3 * x1 * x2);
        let negated = super::negate_dataset(&data).unwrap();
        let opts = OptimizerOptions::for_dimension(6).with_restarts(2);
        let (concave, rmse_concave) =
            fit_convex(&data, 2, Orientation::Concave, &opts, 3).unwrap();
        let (convex, rmse_convex) = fit_convex(&negated, 2, Orientation::Convex, &opts, 3).unwrap();
        assert!((rmse_concave - rmse_convex).abs() < 1e-9);
        for (cp, vp) in concave.planes().iter().zip(convex.planes()) {
            let c = cp.coefs();
            let v = vp.coefs();
            let n = c.len() - 1;
            for j in 0..n {
                assert!((c[j] + v[j]).abs() < 1e-12, "coef {j}: {} vs {}", c[j], v[j]);
            }
            assert!((c[n] - v[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn penalty_vanishes_when_every_plane_can_reach_a_corner() {
        // For y = |x1 - 0.5| both optimal planes attain the data maximum at a
        // domain corner, so the anti-domination term must not bias the fit.
        let points: Vec<(Vec<f64>, f64)> = (0..101)
            .map(|i| {
                let x = i as f64 / 100.0;
                (vec![x], (x - 0.5).abs())
            })
            .collect();
        let data = Dataset::from_points(points).unwrap();
        let opts = OptimizerOptions::for_dimension(4).with_restarts(3);
        let (model, rmse) = fit_convex(&data, 2, Orientation::Convex, &opts, 1).unwrap();
        let corners = data.domain_corners();
        let y_max = data.y_bounds().1;
        let mut penalty = 0.0;
        for p in model.planes() {
            let shortfall = corners
                .iter()
                .map(|c| (y_max - plane_value(p, c).unwrap()).max(0.0))
                .fold(f64::INFINITY, f64::min);
            penalty += shortfall * shortfall;
        }
        penalty *= 1e-3 * data.len() as f64;
        let sse_total = (rmse * rmse * data.len() as f64).max(1e-12);
        assert!(
            penalty <= 0.01 * sse_total,
            "penalty {penalty} vs sse {sse_total}"
        );
    }

    #[test]
    fn every_plane_wins_somewhere_after_penalized_fit() {
        let data = grid_dataset(25, |x1, x2| x1 * x1 + x2 * x2);
        let mut passed = false;
        for seed in 0..5 {
            let opts = OptimizerOptions::for_dimension(12).with_restarts(3);
            let (model, _) = fit_convex(&data, 4, Orientation::Convex, &opts, seed).unwrap();
            let mut winners = vec![0usize; model.planes().len()];
            for i in 0..50 {
                for j in 0..50 {
                    let x = [i as f64 / 49.0, j as f64 / 49.0];
                    let mut best = 0;
                    let mut best_v = f64::NEG_INFINITY;
                    let mut unique = true;
                    for (k, p) in model.planes().iter().enumerate() {
                        let v = plane_value(p, &x).unwrap();
                        if v > best_v + 1e-12 {
                            best_v = v;
                            best = k;
                            unique = true;
                        } else if (v - best_v).abs() <= 1e-12 && k != best {
                            unique = false;
                        }
                    }
                    if unique {
                        winners[best] += 1;
                    }
                }
            }
            if winners.iter().all(|&w| w > 0) {
                passed = true;
                break;
            }
        }
        assert!(passed, "some plane never uniquely wins for any seed");
    }

    #[test]
    fn underdetermined_data_is_rejected() {
        let data = Dataset::from_points(vec![
            (vec![0.0, 0.0], 0.0),
            (vec![1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 1.0),
        ])
        .unwrap();
        let opts = OptimizerOptions::for_dimension(3);
        assert!(matches!(
            fit_convex(&data, 1, Orientation::Convex, &opts, 0),
            Err(Error::Underdetermined { .. })
        ));
    }
}
