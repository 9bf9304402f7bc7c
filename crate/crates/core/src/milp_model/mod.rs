//! MILP problem representation, translation of fitted models into big-M
//! constraint blocks, block replication, and the LP text format.

mod lp_text;

pub use lp_text::{parse_lp, write_lp};

use std::collections::HashMap;

use crate::convex_fit::{ConvexModel, Orientation};
use crate::error::{Error, Result};
use crate::pwca::PwcaModel;
use crate::solver;

/// Relation of a linear constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// Optimization direction of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A continuous decision variable with (possibly infinite) bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ContVar {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// One linear constraint: `sum(coef * var) REL rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A mixed-integer linear problem (or a constraint block of one).
///
/// Variables are continuous or binary; constraints reference declared
/// variables only. Declaration and constraint order is preserved, which the
/// solver and the LP writer rely on for determinism.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpProblem {
    continuous: Vec<ContVar>,
    binaries: Vec<String>,
    constraints: Vec<Constraint>,
    objective_terms: Vec<(String, f64)>,
    sense: Sense,
    names: HashMap<String, bool>, // true when binary
}

impl Default for MilpProblem {
    fn default() -> Self {
        MilpProblem::new(Sense::Minimize)
    }
}

impl MilpProblem {
    pub fn new(sense: Sense) -> MilpProblem {
        MilpProblem {
            continuous: Vec::new(),
            binaries: Vec::new(),
            constraints: Vec::new(),
            objective_terms: Vec::new(),
            sense,
            names: HashMap::new(),
        }
    }

    pub fn add_continuous(&mut self, name: &str, lower: f64, upper: f64) -> Result<()> {
        self.check_new_name(name)?;
        if lower > upper {
            return Err(Error::InvalidProblem(format!(
                "variable {name} has empty bounds [{lower}, {upper}]"
            )));
        }
        self.names.insert(name.to_string(), false);
        self.continuous.push(ContVar {
            name: name.to_string(),
            lower,
            upper,
        });
        Ok(())
    }

    pub fn add_binary(&mut self, name: &str) -> Result<()> {
        self.check_new_name(name)?;
        self.names.insert(name.to_string(), true);
        self.binaries.push(name.to_string());
        Ok(())
    }

    fn check_new_name(&self, name: &str) -> Result<()> {
        if name.is_empty() {
            return Err(Error::Naming("empty variable name".into()));
        }
        if self.names.contains_key(name) {
            return Err(Error::Naming(format!("duplicate variable name '{name}'")));
        }
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        name: &str,
        terms: Vec<(String, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (var, _) in &terms {
            if !self.names.contains_key(var.as_str()) {
                return Err(Error::InvalidProblem(format!(
                    "constraint {name} references undeclared variable '{var}'"
                )));
            }
            if !seen.insert(var.as_str()) {
                return Err(Error::InvalidProblem(format!(
                    "constraint {name} repeats variable '{var}'"
                )));
            }
        }
        self.constraints.push(Constraint {
            name: name.to_string(),
            terms,
            relation,
            rhs,
        });
        Ok(())
    }

    pub fn set_objective(&mut self, terms: Vec<(String, f64)>, sense: Sense) -> Result<()> {
        for (var, _) in &terms {
            if !self.names.contains_key(var.as_str()) {
                return Err(Error::InvalidProblem(format!(
                    "objective references undeclared variable '{var}'"
                )));
            }
        }
        self.objective_terms = terms;
        self.sense = sense;
        Ok(())
    }

    pub fn continuous(&self) -> &[ContVar] {
        &self.continuous
    }

    pub fn binaries(&self) -> &[String] {
        &self.binaries
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective_terms(&self) -> &[(String, f64)] {
        &self.objective_terms
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn is_binary(&self, name: &str) -> Option<bool> {
        self.names.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.continuous.len() + self.binaries.len()
    }

    /// Structural equality up to variable declaration order: same variables
    /// with the same bounds and kinds, same constraint sequence (terms
    /// compared as maps), same objective.
    pub fn structurally_equal(&self, other: &MilpProblem) -> bool {
        fn var_map(p: &MilpProblem) -> HashMap<&str, (f64, f64)> {
            p.continuous
                .iter()
                .map(|v| (v.name.as_str(), (v.lower, v.upper)))
                .collect()
        }
        fn bin_set(p: &MilpProblem) -> std::collections::BTreeSet<&str> {
            p.binaries.iter().map(|s| s.as_str()).collect()
        }
        fn term_map(terms: &[(String, f64)]) -> HashMap<&str, f64> {
            terms.iter().map(|(n, c)| (n.as_str(), *c)).collect()
        }
        if var_map(self) != var_map(other) || bin_set(self) != bin_set(other) {
            return false;
        }
        if self.sense != other.sense
            || term_map(&self.objective_terms) != term_map(&other.objective_terms)
        {
            return false;
        }
        if self.constraints.len() != other.constraints.len() {
            return false;
        }
        self.constraints
            .iter()
            .zip(&other.constraints)
            .all(|(a, b)| {
                a.relation == b.relation
                    && a.rhs == b.rhs
                    && term_map(&a.terms) == term_map(&b.terms)
            })
    }
}

/// Variable names used by a translated model block.
#[derive(Debug, Clone)]
pub struct BlockNames {
    /// Names of the independent variables, length n-1.
    pub xs: Vec<String>,
    pub y: String,
    /// Binary toggle (and prefix for per-plane binaries).
    pub toggle: String,
    /// Prefix for auxiliary continuous variables of simplex formulations.
    pub aux: String,
}

impl BlockNames {
    /// `x1..x{n-1}`, `y`, toggle `t`, auxiliary prefix `w`.
    pub fn default_for(x_dim: usize) -> BlockNames {
        BlockNames {
            xs: (1..=x_dim).map(|j| format!("x{j}")).collect(),
            y: "y".to_string(),
            toggle: "t".to_string(),
            aux: "w".to_string(),
        }
    }
}

/// Variable box for translation: bounds on every x plus y.
#[derive(Debug, Clone, PartialEq)]
pub struct VarBox {
    pub x_bounds: Vec<(f64, f64)>,
    pub y_bounds: (f64, f64),
}

impl VarBox {
    /// The translation box of a fitted model: the fitted x bounds with the
    /// y range expanded by 5% on each side.
    pub fn for_model(x_bounds: &[(f64, f64)], y_bounds: (f64, f64)) -> VarBox {
        let pad = 0.05 * (y_bounds.1 - y_bounds.0);
        VarBox {
            x_bounds: x_bounds.to_vec(),
            y_bounds: (y_bounds.0 - pad, y_bounds.1 + pad),
        }
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self
            .x_bounds
            .iter()
            .all(|(lo, hi)| lo.is_finite() && hi.is_finite())
            && self.y_bounds.0.is_finite()
            && self.y_bounds.1.is_finite();
        if finite {
            Ok(())
        } else {
            Err(Error::UnboundedBigM(
                "big-M values need finite bounds on every variable".into(),
            ))
        }
    }
}

/// Big-M constants of a piecewise-convex block.
///
/// `m_t_plus`/`m_t_minus` bound the interface expression over the box;
/// `m_i_minus[i]`/`m_i_plus[i]` bound plane pair i's expressions from below
/// over the opposite region.
#[derive(Debug, Clone, PartialEq)]
pub struct BigMSet {
    pub m_t_plus: f64,
    pub m_t_minus: f64,
    pub m_i_minus: Vec<f64>,
    pub m_i_plus: Vec<f64>,
}

/// Extreme of a plane expression `[1, x, y] . a` over the box; linear, so it
/// is attained at a box corner and separates per coordinate.
fn box_extreme(coefs: &[f64], var_box: &VarBox, maximize: bool) -> f64 {
    let mut acc = coefs[0];
    let n = coefs.len() - 1;
    for k in 1..=n {
        let (lo, hi) = if k < n {
            var_box.x_bounds[k - 1]
        } else {
            var_box.y_bounds
        };
        let c = coefs[k];
        let pick_hi = (c > 0.0) == maximize;
        acc += c * if pick_hi { hi } else { lo };
    }
    acc
}

/// Minimum of `[1, x, y] . plane` over the box intersected with the given
/// side of the interface, solved as a small LP.
fn side_constrained_min(
    plane: &[f64],
    interface: &[f64],
    var_box: &VarBox,
    side: Relation,
) -> Result<f64> {
    let n = plane.len() - 1;
    let mut lp = MilpProblem::new(Sense::Minimize);
    let mut names = Vec::with_capacity(n);
    for (j, (lo, hi)) in var_box.x_bounds.iter().enumerate() {
        let name = format!("p{}", j + 1);
        lp.add_continuous(&name, *lo, *hi)?;
        names.push(name);
    }
    lp.add_continuous("py", var_box.y_bounds.0, var_box.y_bounds.1)?;
    names.push("py".to_string());

    let ifc_terms: Vec<(String, f64)> = names
        .iter()
        .enumerate()
        .map(|(k, name)| (name.clone(), interface[k + 1]))
        .collect();
    lp.add_constraint("side", ifc_terms, side, -interface[0])?;
    let obj: Vec<(String, f64)> = names
        .iter()
        .enumerate()
        .map(|(k, name)| (name.clone(), plane[k + 1]))
        .collect();
    lp.set_objective(obj, Sense::Minimize)?;

    let solution = solver::solve_lp(&lp)?;
    match solution.status {
        solver::LpStatus::Optimal => Ok(solution.objective + plane[0]),
        // The side region does not intersect the box at all; any constant
        // works since the relaxed rows can never be active.
        solver::LpStatus::Infeasible => Ok(0.0),
        solver::LpStatus::Unbounded => Err(Error::UnboundedBigM(
            "side-constrained big-M subproblem is unbounded".into(),
        )),
    }
}

/// Computes the big-M constants of a piecewise-convex model over a box.
///
/// The interface extrema come from box corners; the per-pair minima are
/// constrained to the opposite side of the interface and solved exactly as
/// small LPs. Values whose unconstrained sign already conforms are tightened
/// to zero.
pub fn big_m_values(model: &PwcaModel, var_box: &VarBox) -> Result<BigMSet> {
    var_box.check_finite()?;
    let ifc = model.interface().coefs();
    let m_t_plus = box_extreme(ifc, var_box, true).max(0.0);
    let m_t_minus = box_extreme(ifc, var_box, false).min(0.0);
    let mut m_i_minus = Vec::with_capacity(model.lower().len());
    let mut m_i_plus = Vec::with_capacity(model.upper().len());
    for plane in model.lower() {
        let v = side_constrained_min(plane.coefs(), ifc, var_box, Relation::Ge)?;
        m_i_minus.push(v.min(0.0));
    }
    for plane in model.upper() {
        let v = side_constrained_min(plane.coefs(), ifc, var_box, Relation::Le)?;
        m_i_plus.push(v.min(0.0));
    }
    Ok(BigMSet {
        m_t_plus,
        m_t_minus,
        m_i_minus,
        m_i_plus,
    })
}

fn plane_terms(coefs: &[f64], names: &BlockNames) -> Vec<(String, f64)> {
    let n = coefs.len() - 1;
    let mut terms: Vec<(String, f64)> = Vec::with_capacity(n);
    for (j, name) in names.xs.iter().enumerate() {
        terms.push((name.clone(), coefs[j + 1]));
    }
    terms.push((names.y.clone(), coefs[n]));
    terms
}

/// Translates a piecewise-convex model into its big-M constraint block:
/// one binary toggle, no auxiliary continuous variables, and `n_hyp + 2`
/// rows (two interface rows plus one row per plane).
pub fn translate_pwca(
    model: &PwcaModel,
    var_box: &VarBox,
    names: &BlockNames,
) -> Result<MilpProblem> {
    if model.orientation() != Orientation::Convex {
        return Err(Error::Parameter(
            "only convex piecewise models translate to the big-M block".into(),
        ));
    }
    if names.xs.len() + 1 != model.dimension() {
        return Err(Error::Parameter(format!(
            "{} variable names for dimension {}",
            names.xs.len(),
            model.dimension()
        )));
    }
    let big_m = big_m_values(model, var_box)?;
    let mut block = MilpProblem::new(Sense::Minimize);
    for (name, (lo, hi)) in names.xs.iter().zip(&var_box.x_bounds) {
        block.add_continuous(name, *lo, *hi)?;
    }
    block.add_continuous(&names.y, var_box.y_bounds.0, var_box.y_bounds.1)?;
    block.add_binary(&names.toggle)?;

    let ifc = model.interface().coefs();
    // Interface rows set the toggle; the toggle relaxes the inactive side.
    let mut below = plane_terms(ifc, names);
    below.push((names.toggle.clone(), -big_m.m_t_plus));
    block.add_constraint("ifc_below", below, Relation::Le, -ifc[0])?;

    let mut above = plane_terms(ifc, names);
    above.push((names.toggle.clone(), big_m.m_t_minus));
    block.add_constraint(
        "ifc_above",
        above,
        Relation::Ge,
        big_m.m_t_minus - ifc[0],
    )?;

    for (i, plane) in model.lower().iter().enumerate() {
        let mut terms = plane_terms(plane.coefs(), names);
        terms.push((names.toggle.clone(), -big_m.m_i_minus[i]));
        block.add_constraint(
            &format!("lower{i}"),
            terms,
            Relation::Ge,
            -plane.coefs()[0],
        )?;
    }
    for (i, plane) in model.upper().iter().enumerate() {
        let mut terms = plane_terms(plane.coefs(), names);
        terms.push((names.toggle.clone(), big_m.m_i_plus[i]));
        block.add_constraint(
            &format!("upper{i}"),
            terms,
            Relation::Ge,
            big_m.m_i_plus[i] - plane.coefs()[0],
        )?;
    }
    Ok(block)
}

/// Translates a simple convex/concave model for the given objective sense.
///
/// The agreeing combination (convex+min, concave+max) needs plain rows and
/// no binaries; the opposing combination needs one binary per plane plus a
/// selection row.
pub fn translate_convex(
    model: &ConvexModel,
    sense: Sense,
    var_box: &VarBox,
    names: &BlockNames,
) -> Result<MilpProblem> {
    if names.xs.len() + 1 != model.dimension() {
        return Err(Error::Parameter(format!(
            "{} variable names for dimension {}",
            names.xs.len(),
            model.dimension()
        )));
    }
    let mut block = MilpProblem::new(Sense::Minimize);
    for (name, (lo, hi)) in names.xs.iter().zip(&var_box.x_bounds) {
        block.add_continuous(name, *lo, *hi)?;
    }
    block.add_continuous(&names.y, var_box.y_bounds.0, var_box.y_bounds.1)?;

    let agreeing = matches!(
        (model.orientation(), sense),
        (Orientation::Convex, Sense::Minimize) | (Orientation::Concave, Sense::Maximize)
    );
    if agreeing {
        // y >= plane (convex) / y <= plane (concave): plain superposition.
        let relation = match model.orientation() {
            Orientation::Convex => Relation::Ge,
            Orientation::Concave => Relation::Le,
        };
        for (i, plane) in model.planes().iter().enumerate() {
            let terms = plane_terms(plane.coefs(), names);
            block.add_constraint(&format!("plane{i}"), terms, relation, -plane.coefs()[0])?;
        }
        return Ok(block);
    }

    // Opposing combination: exactly one plane is selected by its binary and
    // the rest are relaxed by their big-M constants.
    var_box.check_finite()?;
    let mut selection = Vec::with_capacity(model.planes().len());
    for (i, plane) in model.planes().iter().enumerate() {
        let b_name = format!("{}{}", names.toggle, i);
        block.add_binary(&b_name)?;
        selection.push((b_name.clone(), 1.0));
        let coefs = plane.coefs();
        match model.orientation() {
            // min over a concave model: y >= the selected plane, the rest
            // relaxed down to their box minimum: a.p >= M (1 - b).
            Orientation::Concave => {
                let m = box_extreme(coefs, var_box, false).min(0.0);
                let mut terms = plane_terms(coefs, names);
                terms.push((b_name, m));
                block.add_constraint(&format!("plane{i}"), terms, Relation::Ge, m - coefs[0])?;
            }
            // max over a convex model: y <= the selected plane, the rest
            // relaxed up to their box maximum: a.p <= M (1 - b).
            Orientation::Convex => {
                let m = box_extreme(coefs, var_box, true).max(0.0);
                let mut terms = plane_terms(coefs, names);
                terms.push((b_name, m));
                block.add_constraint(&format!("plane{i}"), terms, Relation::Le, m - coefs[0])?;
            }
        }
    }
    block.add_constraint("select", selection, Relation::Eq, 1.0)?;
    Ok(block)
}

/// Builds `count` disjoint copies of a block with index-suffixed names.
/// A single copy returns the block unchanged.
pub fn replicate(block: &MilpProblem, count: usize) -> Result<MilpProblem> {
    if count == 0 {
        return Err(Error::Parameter("replication count must be at least 1".into()));
    }
    if count == 1 {
        return Ok(block.clone());
    }
    let mut out = MilpProblem::new(block.sense());
    let mut objective = Vec::new();
    for k in 0..count {
        let rename = |name: &str| format!("{name}_{k}");
        for var in block.continuous() {
            out.add_continuous(&rename(&var.name), var.lower, var.upper)?;
        }
        for bin in block.binaries() {
            out.add_binary(&rename(bin))?;
        }
        for con in block.constraints() {
            let terms = con
                .terms
                .iter()
                .map(|(n, c)| (rename(n), *c))
                .collect();
            out.add_constraint(&rename(&con.name), terms, con.relation, con.rhs)?;
        }
        for (name, coef) in block.objective_terms() {
            objective.push((rename(name), *coef));
        }
    }
    let sense = block.sense();
    out.set_objective(objective, sense)?;
    Ok(out)
}

/// Name of variable `base` in copy `k` of an N-fold replication.
pub fn replicated_name(base: &str, k: usize, count: usize) -> String {
    if count == 1 {
        base.to_string()
    } else {
        format!("{base}_{k}")
    }
}

/// Serializes a problem in LP text format and writes it to a file.
pub fn export_lp(problem: &MilpProblem, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, write_lp(problem))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::geometry::Hyperplane;
    use crate::optimizer::OptimizerOptions;
    use crate::pwca::{self, RotationParams};

    fn unit_box(x_dim: usize) -> VarBox {
        VarBox {
            x_bounds: vec![(0.0, 1.0); x_dim],
            y_bounds: (0.0, 1.0),
        }
    }

    #[test]
    fn interface_big_m_from_corners() {
        // Interface x1 - 0.5 = 0 on the unit box in 3 dimensions.
        let mut params = RotationParams::zeros(3, 1);
        params.s1 = 0.5;
        let model = pwca::PwcaModel::from_params(
            params,
            Orientation::Convex,
            vec![(0.0, 1.0), (0.0, 1.0)],
            (0.0, 1.0),
        )
        .unwrap();
        let big_m = big_m_values(&model, &unit_box(2)).unwrap();
        assert!((big_m.m_t_plus - 0.5).abs() < 1e-12);
        assert!((big_m.m_t_minus + 0.5).abs() < 1e-12);
    }

    #[test]
    fn horizontal_plane_big_m_is_zero() {
        // Both families are the plane y = 0; over y in [0,1] the expression
        // p . a = y is non-negative on either side, so the tightened big-M
        // values are zero.
        let model = pwca::PwcaModel::from_params(
            RotationParams::zeros(3, 1),
            Orientation::Convex,
            vec![(0.0, 1.0), (0.0, 1.0)],
            (0.0, 1.0),
        )
        .unwrap();
        let big_m = big_m_values(&model, &unit_box(2)).unwrap();
        assert_eq!(big_m.m_i_minus, vec![0.0]);
        assert_eq!(big_m.m_i_plus, vec![0.0]);
    }

    #[test]
    fn infinite_box_is_rejected() {
        let model = pwca::PwcaModel::from_params(
            RotationParams::zeros(3, 1),
            Orientation::Convex,
            vec![(0.0, 1.0), (0.0, 1.0)],
            (0.0, 1.0),
        )
        .unwrap();
        let var_box = VarBox {
            x_bounds: vec![(0.0, 1.0), (0.0, f64::INFINITY)],
            y_bounds: (0.0, 1.0),
        };
        assert!(matches!(
            big_m_values(&model, &var_box),
            Err(Error::UnboundedBigM(_))
        ));
    }

    #[test]
    fn pwca_block_counts() {
        let data = Dataset::multiplication_grid(25).unwrap();
        let init = pwca::default_interface_sweep(&data, 4).unwrap();
        let opts = OptimizerOptions::for_dimension(12);
        let (model, _) = pwca::fit_pwca(&data, 4, &init, &opts, 0).unwrap();
        let var_box = VarBox::for_model(model.x_bounds(), model.y_bounds());
        let names = BlockNames::default_for(2);
        let block = translate_pwca(&model, &var_box, &names).unwrap();
        assert_eq!(block.binaries().len(), 1);
        assert_eq!(block.continuous().len(), 3); // x1, x2, y: no auxiliaries
        assert_eq!(block.constraints().len(), 4 + 2);
    }

    #[test]
    fn two_plane_block_has_four_rows() {
        let mut params = RotationParams::zeros(3, 1);
        params.s1 = 0.5;
        params.pairs[0].r3_minus = -0.3;
        params.pairs[0].r3_plus = 0.3;
        let model = pwca::PwcaModel::from_params(
            params,
            Orientation::Convex,
            vec![(0.0, 1.0), (0.0, 1.0)],
            (-1.0, 1.0),
        )
        .unwrap();
        let block = translate_pwca(
            &model,
            &VarBox::for_model(model.x_bounds(), model.y_bounds()),
            &BlockNames::default_for(2),
        )
        .unwrap();
        assert_eq!(block.binaries().len(), 1);
        assert_eq!(block.constraints().len(), 2 + 2);
    }

    fn three_plane_model(orientation: Orientation) -> ConvexModel {
        let planes = vec![
            Hyperplane::from_affine(0.1, &[0.5, 0.0]),
            Hyperplane::from_affine(0.0, &[0.2, 0.7]),
            Hyperplane::from_affine(-0.2, &[1.0, 1.0]),
        ];
        ConvexModel::new(
            planes,
            orientation,
            vec![(0.0, 1.0), (0.0, 1.0)],
            (0.0, 2.0),
        )
        .unwrap()
    }

    #[test]
    fn convex_min_is_pure_rows() {
        let model = three_plane_model(Orientation::Convex);
        let block = translate_convex(
            &model,
            Sense::Minimize,
            &unit_box(2),
            &BlockNames::default_for(2),
        )
        .unwrap();
        assert_eq!(block.binaries().len(), 0);
        assert_eq!(block.constraints().len(), 3);
    }

    #[test]
    fn concave_min_needs_selection_binaries() {
        let model = three_plane_model(Orientation::Concave);
        let block = translate_convex(
            &model,
            Sense::Minimize,
            &unit_box(2),
            &BlockNames::default_for(2),
        )
        .unwrap();
        assert_eq!(block.binaries().len(), 3);
        assert_eq!(block.constraints().len(), 4); // three big-M rows + selection
    }

    #[test]
    fn replicate_once_is_identity() {
        let model = three_plane_model(Orientation::Convex);
        let block = translate_convex(
            &model,
            Sense::Minimize,
            &unit_box(2),
            &BlockNames::default_for(2),
        )
        .unwrap();
        let copy = replicate(&block, 1).unwrap();
        assert_eq!(copy, block);
    }

    #[test]
    fn replicate_scales_linearly() {
        let data = Dataset::multiplication_grid(25).unwrap();
        let init = pwca::default_interface_sweep(&data, 4).unwrap();
        let opts = OptimizerOptions::for_dimension(12);
        let (model, _) = pwca::fit_pwca(&data, 4, &init, &opts, 0).unwrap();
        let block = translate_pwca(
            &model,
            &VarBox::for_model(model.x_bounds(), model.y_bounds()),
            &BlockNames::default_for(2),
        )
        .unwrap();
        let ten = replicate(&block, 10).unwrap();
        assert_eq!(ten.binaries().len(), 10);
        assert_eq!(ten.constraints().len(), 60);
        let many = replicate(&block, 300).unwrap();
        assert_eq!(many.binaries().len(), 300);
    }
}
