//! TOML run configuration. Unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use chemosteady_core::domain::{build_grid, BoundaryData, BoundaryNode, DomainSpec, Grid};
use chemosteady_core::mass::{SolverSettings, Target, DEFAULT_MASS_TOL};
use chemosteady_core::scalar::ScalarSolveConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub propsuite: Option<LatticeConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainConfig {
    Interval { length: f64, resolution: usize },
    Ball { dimension: u32, radius: f64, resolution: usize },
    Rectangle { lx: f64, ly: f64, resolution: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub gamma: f64,
    pub g: Permeability,
    pub mass: Option<f64>,
    /// Mass per unit volume; multiplied by the exact domain measure.
    pub mass_density: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Permeability {
    Constant {
        value: f64,
    },
    /// Per-edge constants. Intervals use `left`/`right`; rectangles also
    /// `bottom`/`top`. Missing edges are impermeable.
    Edges {
        #[serde(default)]
        left: f64,
        #[serde(default)]
        right: f64,
        #[serde(default)]
        bottom: f64,
        #[serde(default)]
        top: f64,
    },
    /// One value per boundary node, in the grid's boundary order.
    Table {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol_outer: f64,
    pub max_picard: usize,
    pub newton_switch: f64,
    pub damping: f64,
    pub max_newton: usize,
    pub mass_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = ScalarSolveConfig::default();
        Self {
            tol_outer: s.tol_outer,
            max_picard: s.max_picard,
            newton_switch: s.newton_switch,
            damping: s.damping,
            max_newton: s.max_newton,
            mass_tol: DEFAULT_MASS_TOL,
        }
    }
}

impl SolverConfig {
    pub fn scalar(&self) -> ScalarSolveConfig {
        ScalarSolveConfig {
            tol_outer: self.tol_outer,
            max_picard: self.max_picard,
            newton_switch: self.newton_switch,
            damping: self.damping,
            max_newton: self.max_newton,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub fields: String,
    pub summary: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            fields: "fields.tsv".into(),
            summary: "summary.json".into(),
        }
    }
}

/// Parameter lattice for the property suite: every `(gamma, g_scale)` pair
/// is run over the full `alpha` chain.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub alpha: Vec<f64>,
    pub gamma: Option<Vec<f64>>,
    #[serde(default = "unit_scale")]
    pub g_scale: Vec<f64>,
}

fn unit_scale() -> Vec<f64> {
    vec![1.0]
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.physics;
        let given: Vec<&str> = [("mass", p.mass), ("mass_density", p.mass_density), ("alpha", p.alpha)]
            .iter()
            .filter_map(|(k, v)| v.map(|_| *k))
            .collect();
        match given.len() {
            0 => bail!("physics: one of mass, mass_density or alpha is required"),
            1 => {}
            _ => bail!("physics: {} are mutually exclusive, give exactly one", given.join(" and ")),
        }
        if let Some(m) = p.mass.or(p.mass_density) {
            if !(m.is_finite() && m > 0.0) {
                bail!("physics: mass must be positive, got {m}");
            }
        }
        if let Some(a) = p.alpha {
            if !(a.is_finite() && a >= 0.0) {
                bail!("physics: alpha must be nonnegative, got {a}");
            }
        }
        self.solver.scalar().validate()?;
        if !(self.solver.mass_tol > 0.0) {
            bail!("solver: mass_tol must be positive");
        }
        if let Some(lattice) = &self.propsuite {
            if lattice.alpha.len() < 2 {
                bail!("propsuite: alpha needs at least two values");
            }
            if lattice.alpha.windows(2).any(|w| w[1] <= w[0]) || lattice.alpha[0] <= 0.0 {
                bail!("propsuite: alpha must be positive and strictly increasing");
            }
            if lattice.g_scale.is_empty() || lattice.g_scale.iter().any(|s| !(*s > 0.0)) {
                bail!("propsuite: g_scale entries must be positive");
            }
            if lattice.gamma.as_ref().is_some_and(|g| g.is_empty()) {
                bail!("propsuite: gamma list is empty");
            }
        }
        Ok(())
    }

    pub fn domain_spec(&self) -> Result<DomainSpec> {
        Ok(match self.domain {
            DomainConfig::Interval { length, .. } => DomainSpec::interval(length)?,
            DomainConfig::Ball { dimension, radius, .. } => DomainSpec::ball(dimension, radius)?,
            DomainConfig::Rectangle { lx, ly, .. } => DomainSpec::rectangle(lx, ly)?,
        })
    }

    pub fn resolution(&self) -> usize {
        match self.domain {
            DomainConfig::Interval { resolution, .. }
            | DomainConfig::Ball { resolution, .. }
            | DomainConfig::Rectangle { resolution, .. } => resolution,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(build_grid(self.domain_spec()?, self.resolution())?)
    }

    pub fn target(&self) -> Result<Target> {
        let p = &self.physics;
        if let Some(a) = p.alpha {
            return Ok(Target::Alpha(a));
        }
        if let Some(m) = p.mass {
            return Ok(Target::Mass(m));
        }
        let density = p.mass_density.expect("validated");
        Ok(Target::Mass(density * self.domain_spec()?.measure()))
    }

    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            scalar: self.solver.scalar(),
            mass_tol: self.solver.mass_tol,
        }
    }

    pub fn boundary(&self, grid: &Grid) -> Result<BoundaryData> {
        self.boundary_with(grid, self.physics.gamma, 1.0)
    }

    /// Boundary data with overridden saturation and scaled permeability.
    pub fn boundary_with(&self, grid: &Grid, gamma: f64, g_scale: f64) -> Result<BoundaryData> {
        let values = match &self.physics.g {
            Permeability::Constant { value } => vec![*value; grid.boundary().len()],
            Permeability::Edges { left, right, bottom, top } => {
                if matches!(self.domain, DomainConfig::Ball { .. }) {
                    bail!("physics.g: the edges form needs an interval or rectangle domain");
                }
                if matches!(self.domain, DomainConfig::Interval { .. }) && (*bottom != 0.0 || *top != 0.0) {
                    bail!("physics.g: an interval has no bottom or top edge");
                }
                let edge = [[*left, *right], [*bottom, *top]];
                grid.boundary().iter().map(|b| face_average(grid, b, &edge)).collect()
            }
            Permeability::Table { values } => {
                if values.len() != grid.boundary().len() {
                    bail!(
                        "physics.g: table has {} values but the grid has {} boundary nodes",
                        values.len(),
                        grid.boundary().len()
                    );
                }
                values.clone()
            }
        };
        Ok(BoundaryData::new(grid, gamma, values.iter().map(|v| v * g_scale).collect())?)
    }
}

/// At corners the ghost-node rows add one `2/h` flux per face, so the
/// `2/h`-weighted mean reproduces each edge's permeability exactly.
fn face_average(grid: &Grid, node: &BoundaryNode, edge: &[[f64; 2]; 2]) -> f64 {
    let h = grid.spacing();
    let (mut num, mut den) = (0.0, 0.0);
    for f in &node.faces {
        let w = 2.0 / h[f.axis];
        num += w * edge[f.axis][f.upper as usize];
        den += w;
    }
    num / den
}
