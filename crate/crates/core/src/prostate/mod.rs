//! Built-in prostate tumour models: androgen-dependent (X) and
//! androgen-independent (Y) cells, androgen (Z) and PSA (V) molecules,
//! under continuous or intermittent androgen suppression, with optional
//! random PSA production or a hidden two-state modulator.
//!
//! Models are generated as source text with a `params` block, so the
//! shipped `.sccp` files and command-line overrides use the same names.

mod reference;

use std::fmt::Write as _;
use std::str::FromStr;

use crate::dsl::{parse_program_with, Diagnostic};
use crate::ir::{Program, Store};

pub use reference::{reference_ode_field, reference_solution, ReferenceOde, ReferencePoint};

/// Androgen suppression policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Continuous suppression: no androgen production.
    Cas,
    /// Intermittent suppression: PSA checked every period, drug switched
    /// off below the low threshold and back on above the high one.
    Ias,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Base,
    /// PSA production rate multiplied by `K ~ Unif(0, 2)`, resampled before
    /// every production event.
    RandomPsaRate,
    /// A hidden variable `H` flipping between 0 and 1 at rate 2 scales PSA
    /// production by `1 + 2H`.
    HiddenSwitch,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unknown {what} `{got}` (expected one of: {expected})")]
pub struct ParseNameError {
    what: &'static str,
    got: String,
    expected: &'static str,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Cas => "cas",
            Policy::Ias => "ias",
        }
    }
}

impl FromStr for Policy {
    type Err = ParseNameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cas" => Ok(Policy::Cas),
            "ias" => Ok(Policy::Ias),
            _ => Err(ParseNameError {
                what: "policy",
                got: s.to_string(),
                expected: "cas, ias",
            }),
        }
    }
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::RandomPsaRate => "random-psa-rate",
            Variant::HiddenSwitch => "hidden",
        }
    }
}

impl FromStr for Variant {
    type Err = ParseNameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Ok(Variant::Base),
            "random-psa-rate" | "random" => Ok(Variant::RandomPsaRate),
            "hidden" | "hidden-switch" => Ok(Variant::HiddenSwitch),
            _ => Err(ParseNameError {
                what: "variant",
                got: s.to_string(),
                expected: "base, random-psa-rate, hidden",
            }),
        }
    }
}

/// Model parameters. Rates are per day; `x_init`, `y_init`, `z_init` and
/// the PSA thresholds are in normalised units, converted to counts by
/// `n0` (cells), `omega_z` (androgen) and `omega_v` (PSA).
#[derive(Clone, Debug, PartialEq)]
pub struct ProstateParams {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub beta_x: f64,
    pub beta_y: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub m1: f64,
    pub z0: f64,
    pub d: f64,
    pub tau: f64,
    pub omega_z: f64,
    pub omega_v: f64,
    pub n0: f64,
    /// Factor on the mutation propensity; `None` means `n0`, which makes
    /// the fluid limit reproduce the normalised mutation flux
    /// `m1 (1 - z / z0)`.
    pub mut_scale: Option<f64>,
    pub x_init: f64,
    pub y_init: f64,
    pub z_init: f64,
    pub psa_low: f64,
    pub psa_high: f64,
    pub check_period: f64,
    /// Hidden-switch variant: scale PSA degradation instead of production.
    pub hidden_on_degradation: bool,
}

impl Default for ProstateParams {
    fn default() -> Self {
        ProstateParams {
            alpha_x: 0.0204,
            alpha_y: 0.0242,
            beta_x: 0.0076,
            beta_y: 0.0168,
            k1: 0.0,
            k2: 2.0,
            k3: 8.0,
            k4: 0.5,
            m1: 5e-5,
            z0: 20.0,
            d: 1.0,
            tau: 62.5,
            omega_z: 1e5,
            omega_v: 1e5,
            n0: 1e5,
            mut_scale: None,
            x_init: 15.0,
            y_init: 0.1,
            z_init: 12.0,
            psa_low: 4.0,
            psa_high: 10.0,
            check_period: 28.0,
            hidden_on_degradation: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("parameter `{0}` must be positive and finite, got {1}")]
    NotPositive(&'static str, f64),
    #[error("parameter `{0}` must be non-negative and finite, got {1}")]
    Negative(&'static str, f64),
    #[error("parameter `d` must lie in [0, 1], got {0}")]
    D(f64),
    #[error("the low PSA threshold ({0}) must be below the high one ({1})")]
    Thresholds(f64, f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("generated model failed to parse: {}", .0.iter().map(|d| d.render("<prostate>")).collect::<Vec<_>>().join("; "))]
    Parse(Vec<Diagnostic>),
}

impl ProstateParams {
    /// Sets the three conversion factors to `n`.
    pub fn with_scaling(mut self, n: f64) -> Self {
        self.n0 = n;
        self.omega_z = n;
        self.omega_v = n;
        self
    }

    pub fn mutation_scale(&self) -> f64 {
        self.mut_scale.unwrap_or(self.n0)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("alpha_x", self.alpha_x),
            ("alpha_y", self.alpha_y),
            ("beta_x", self.beta_x),
            ("beta_y", self.beta_y),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("m1", self.m1),
            ("z0", self.z0),
            ("tau", self.tau),
            ("OmegaZ", self.omega_z),
            ("OmegaV", self.omega_v),
            ("N0", self.n0),
            ("psa_low", self.psa_low),
            ("psa_high", self.psa_high),
            ("check_period", self.check_period),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ParamError::NotPositive(name, v));
            }
        }
        let non_negative = [
            ("k1", self.k1),
            ("mut_scale", self.mutation_scale()),
            ("x_init", self.x_init),
            ("y_init", self.y_init),
            ("z_init", self.z_init),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ParamError::Negative(name, v));
            }
        }
        if !(0.0..=1.0).contains(&self.d) {
            return Err(ParamError::D(self.d));
        }
        if self.psa_low >= self.psa_high {
            return Err(ParamError::Thresholds(self.psa_low, self.psa_high));
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Source text of a prostate model.
pub fn prostate_source(p: &ProstateParams, policy: Policy, variant: Variant) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "// Prostate tumour growth under {} androgen suppression ({} variant).",
        match policy {
            Policy::Cas => "continuous",
            Policy::Ias => "intermittent",
        },
        variant.name()
    );
    s.push_str("// Counts: X, Y cells; Z androgen and V PSA molecules.\n\n");
    s.push_str("params {\n");
    let mut param = |name: &str, v: String| {
        let _ = writeln!(s, "    {name} = {v};");
    };
    param("alpha_x", num(p.alpha_x));
    param("alpha_y", num(p.alpha_y));
    param("beta_x", num(p.beta_x));
    param("beta_y", num(p.beta_y));
    param("k1", num(p.k1));
    param("k2", num(p.k2));
    param("k3", num(p.k3));
    param("k4", num(p.k4));
    param("m1", num(p.m1));
    param("z0", num(p.z0));
    param("d", num(p.d));
    param("tau", num(p.tau));
    param("OmegaZ", num(p.omega_z));
    param("OmegaV", num(p.omega_v));
    param("N0", num(p.n0));
    param(
        "mut_scale",
        p.mut_scale.map_or_else(|| "N0".to_string(), num),
    );
    param("x_init", num(p.x_init));
    param("y_init", num(p.y_init));
    param("z_init", num(p.z_init));
    if policy == Policy::Ias {
        param("psa_low", num(p.psa_low));
        param("psa_high", num(p.psa_high));
        param("check_period", num(p.check_period));
    }
    if variant == Variant::HiddenSwitch {
        param(
            "hidden_on_degradation",
            num(if p.hidden_on_degradation { 1.0 } else { 0.0 }),
        );
    }
    s.push_str("}\n\n");

    s.push_str("vars {\n");
    s.push_str("    int X = x_init * N0;\n");
    s.push_str("    int Y = y_init * N0;\n");
    s.push_str("    int Z = z_init * OmegaZ;\n");
    s.push_str("    // PSA starts at its stationary level\n");
    s.push_str("    int V = (x_init + y_init) * OmegaV;\n");
    if policy == Policy::Ias {
        s.push_str("    int U = 1;\n");
        s.push_str("    W = check_period;\n");
    }
    match variant {
        Variant::Base => {}
        Variant::RandomPsaRate => s.push_str("    K = 1;\n"),
        Variant::HiddenSwitch => s.push_str("    int H = 0;\n"),
    }
    s.push_str("}\n\n");

    s.push_str(
        "growthAD :- [X > 0 -> X' = X + 1]{alpha_x * (k1 + (1 - k1) * Z / (Z + k2 * OmegaZ)) * X}.growthAD;\n\
         deathAD :- [X > 0 -> X' = X - 1]{beta_x * (k3 + (1 - k3) * Z / (Z + k4 * OmegaZ)) * X}.deathAD;\n\
         growthAI :- [Y > 0 -> Y' = Y + 1]{alpha_y * (1 - d * Z / (z0 * OmegaZ)) * Y}.growthAI;\n\
         deathAI :- [Y > 0 -> Y' = Y - 1]{beta_y * Y}.deathAI;\n\
         mutateADtoAI :- [X > 0 -> X' = X - 1, Y' = Y + 1]{mut_scale * m1 * (1 - Z / (z0 * OmegaZ))}.mutateADtoAI;\n\
         degradeANDH :- [Z > 0 -> Z' = Z - 1]{Z / tau}.degradeANDH;\n",
    );
    match policy {
        Policy::Cas => s.push_str("produceANDH :- [true -> Z' = Z + 1]{0}.produceANDH;\n"),
        Policy::Ias => s.push_str(
            "produceANDHc :- [U = 0 -> Z' = Z + 1]{z0 * OmegaZ / tau}.produceANDHc\n\
             \x20            + [U = 1 -> Z' = Z + 1]{0}.produceANDHc;\n",
        ),
    }
    match variant {
        Variant::Base => s.push_str(
            "producePSA :- [true -> V' = V + 1]{OmegaV * (X + Y) / N0}.producePSA;\n\
             degradePSA :- [V > 0 -> V' = V - 1]{V}.degradePSA;\n",
        ),
        Variant::RandomPsaRate => s.push_str(
            "producePSA_draw :- [true -> K' = Unif(0, 2)]{inf}.producePSA_emit;\n\
             producePSA_emit :- [true -> V' = V + 1]{K * OmegaV * (X + Y) / N0}.producePSA_draw;\n\
             degradePSA :- [V > 0 -> V' = V - 1]{V}.degradePSA;\n",
        ),
        Variant::HiddenSwitch => s.push_str(
            "producePSA :- [true -> V' = V + 1]{(1 + 2 * H * (1 - hidden_on_degradation)) * OmegaV * (X + Y) / N0}.producePSA;\n\
             degradePSA :- [V > 0 -> V' = V - 1]{(1 + 2 * H * hidden_on_degradation) * V}.degradePSA;\n\
             hidden :- [H = 0 -> H' = H + 1]{2}.hidden + [H = 1 -> H' = H - 1]{2}.hidden;\n",
        ),
    }
    if policy == Policy::Ias {
        s.push_str(
            "checkPSA_on :- [Time = W and V < psa_low * OmegaV -> W' = W + check_period, U' = 0]{inf}.checkPSA_off\n\
             \x20           + [Time = W and V >= psa_low * OmegaV -> W' = W + check_period]{inf}.checkPSA_on;\n\
             checkPSA_off :- [Time = W and V >= psa_high * OmegaV -> W' = W + check_period, U' = 1]{inf}.checkPSA_on\n\
             \x20            + [Time = W and V < psa_high * OmegaV -> W' = W + check_period]{inf}.checkPSA_off;\n",
        );
    }

    let mut network = vec![
        "growthAD",
        "deathAD",
        "growthAI",
        "deathAI",
        "mutateADtoAI",
        match policy {
            Policy::Cas => "produceANDH",
            Policy::Ias => "produceANDHc",
        },
        "degradeANDH",
        match variant {
            Variant::RandomPsaRate => "producePSA_draw",
            _ => "producePSA",
        },
        "degradePSA",
    ];
    if variant == Variant::HiddenSwitch {
        network.push("hidden");
    }
    if policy == Policy::Ias {
        network.push("checkPSA_on");
    }
    let _ = writeln!(s, "\nnetwork {};", network.join(" || "));
    s
}

/// Parses the generated model. Parameter overrides use the names of the
/// `params` block.
pub fn build_prostate_program_with(
    p: &ProstateParams,
    policy: Policy,
    variant: Variant,
    overrides: &[(String, f64)],
) -> Result<Program, BuildError> {
    p.validate()?;
    parse_program_with(&prostate_source(p, policy, variant), overrides)
        .into_result()
        .map_err(BuildError::Parse)
}

pub fn build_prostate_program(
    p: &ProstateParams,
    policy: Policy,
    variant: Variant,
) -> Result<Program, BuildError> {
    build_prostate_program_with(p, policy, variant, &[])
}

/// Initial store of the model, computed directly from the parameters:
/// counts are normalised values times the conversion factor, rounded.
pub fn initial_store(p: &ProstateParams, policy: Policy, variant: Variant) -> Store {
    let mut v = vec![
        (p.x_init * p.n0).round(),
        (p.y_init * p.n0).round(),
        (p.z_init * p.omega_z).round(),
        ((p.x_init + p.y_init) * p.omega_v).round(),
    ];
    if policy == Policy::Ias {
        v.push(1.0);
        v.push(p.check_period);
    }
    match variant {
        Variant::Base => {}
        Variant::RandomPsaRate => v.push(1.0),
        Variant::HiddenSwitch => v.push(0.0),
    }
    if policy == Policy::Ias {
        // the clock
        v.push(0.0);
    }
    Store::new(v)
}

/// File name of the shipped model for a policy and variant.
pub fn model_file_name(policy: Policy, variant: Variant) -> String {
    format!("prostate_{}_{}.sccp", policy.name(), variant.name())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Rate;

    fn rate(p: &Program, agent: &str, branch: usize, values: &[f64]) -> f64 {
        match &p.definition(agent).unwrap().branches[branch].action.rate {
            Rate::Finite(e) => e.eval(values).unwrap(),
            Rate::Infinite => f64::INFINITY,
        }
    }

    #[test]
    fn cas_structure() {
        let p =
            build_prostate_program(&ProstateParams::default(), Policy::Cas, Variant::Base).unwrap();
        assert_eq!(p.network.len(), 9);
        assert_eq!(p.variables.len(), 4);
        let s = p.initial_store();
        assert_eq!(s.values, vec![1.5e6, 1e4, 1.2e6, 1.51e6]);
        assert_eq!(rate(&p, "produceANDH", 0, &s.values), 0.0);
    }

    #[test]
    fn ias_production_rates() {
        let p =
            build_prostate_program(&ProstateParams::default(), Policy::Ias, Variant::Base).unwrap();
        let v = p.initial_store().values;
        assert_eq!(&v[4..6], &[1.0, 28.0]);
        assert_eq!(rate(&p, "produceANDHc", 0, &v), 32000.0);
        assert_eq!(rate(&p, "produceANDHc", 1, &v), 0.0);
        assert_eq!(p.variables[6].name, "Time");
    }

    #[test]
    fn hidden_switch_rates() {
        let p = build_prostate_program(
            &ProstateParams::default(),
            Policy::Cas,
            Variant::HiddenSwitch,
        )
        .unwrap();
        let h = p.var_id("H").unwrap();
        let mut v = p.initial_store().values;
        assert_eq!(rate(&p, "hidden", 0, &v), 2.0);
        assert_eq!(rate(&p, "hidden", 1, &v), 2.0);
        let base = rate(&p, "producePSA", 0, &v);
        v[h.index()] = 1.0;
        assert_eq!(rate(&p, "producePSA", 0, &v), 3.0 * base);
        assert_eq!(rate(&p, "degradePSA", 0, &v), v[3]);
    }

    #[test]
    fn scaling_rescales_initial_values() {
        let params = ProstateParams::default().with_scaling(100.0);
        let p = build_prostate_program(&params, Policy::Cas, Variant::Base).unwrap();
        let s = p.initial_store();
        assert_eq!(&s.values[..2], &[1500.0, 10.0]);
        for policy in [Policy::Cas, Policy::Ias] {
            for variant in [Variant::Base, Variant::RandomPsaRate, Variant::HiddenSwitch] {
                let p = build_prostate_program(&params, policy, variant).unwrap();
                assert_eq!(
                    p.initial_store().values,
                    initial_store(&params, policy, variant).values,
                    "{policy:?} {variant:?}"
                );
            }
        }
    }

    #[test]
    fn overrides_follow_names() {
        let p = build_prostate_program_with(
            &ProstateParams::default(),
            Policy::Cas,
            Variant::Base,
            &[("N0".into(), 10.0), ("mut_scale".into(), 1.0)],
        )
        .unwrap();
        assert_eq!(p.variables[0].init, 150.0);
        let v = p.initial_store().values;
        let m = rate(&p, "mutateADtoAI", 0, &v);
        assert!((m - 5e-5 * (1.0 - 12.0 / 20.0)).abs() < 1e-18);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let p = ProstateParams {
            d: 2.0,
            ..ProstateParams::default()
        };
        assert_eq!(p.validate(), Err(ParamError::D(2.0)));
        let p = ProstateParams {
            psa_low: 12.0,
            ..ProstateParams::default()
        };
        assert!(matches!(
            build_prostate_program(&p, Policy::Ias, Variant::Base),
            Err(BuildError::Param(ParamError::Thresholds(..)))
        ));
    }

    #[test]
    fn names_round_trip() {
        for s in ["cas", "ias"] {
            assert_eq!(s.parse::<Policy>().unwrap().name(), s);
        }
        for s in ["base", "random-psa-rate", "hidden"] {
            assert_eq!(s.parse::<Variant>().unwrap().name(), s);
        }
        assert!("xyz".parse::<Policy>().is_err());
    }
}
