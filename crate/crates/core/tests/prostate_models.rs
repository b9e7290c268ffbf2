use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sccp_core::dsl::parse_program;
use sccp_core::ir::{Program, Rate};
use sccp_core::prostate::{
    build_prostate_program, model_file_name, prostate_source, reference_ode_field, Policy,
    ProstateParams, Variant,
};
use sccp_core::rts::extend_program;
use sccp_core::tdsha::{compile_program, drift_field, PartitionVector};

const POLICIES: [Policy; 2] = [Policy::Cas, Policy::Ias];
const VARIANTS: [Variant; 3] = [Variant::Base, Variant::RandomPsaRate, Variant::HiddenSwitch];

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

/// Set `SCCP_BLESS=1` to rewrite the shipped model files.
#[test]
fn shipped_model_files_match_constructors() {
    let bless = std::env::var_os("SCCP_BLESS").is_some();
    let p = ProstateParams::default();
    for policy in POLICIES {
        for variant in VARIANTS {
            let path = models_dir().join(model_file_name(policy, variant));
            let generated = prostate_source(&p, policy, variant);
            if bless {
                std::fs::write(&path, &generated).unwrap();
            }
            let shipped = std::fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(shipped, generated, "{} is stale", path.display());
            let parsed = parse_program(&shipped).unwrap();
            assert_eq!(parsed, build_prostate_program(&p, policy, variant).unwrap());
        }
    }
}

fn rate(p: &Program, agent: &str, branch: usize, values: &[f64]) -> f64 {
    match &p.definition(agent).unwrap().branches[branch].action.rate {
        Rate::Finite(e) => e.eval(values).unwrap(),
        Rate::Infinite => f64::INFINITY,
    }
}

fn close(a: f64, b: f64, rtol: f64) -> bool {
    a == b || (a - b).abs() <= rtol * a.abs().max(b.abs())
}

/// Fig. 2 rate table written out by hand in molecule counts.
fn oracle_rates(p: &ProstateParams, s: &Store4) -> Vec<(&'static str, usize, f64)> {
    let (nx, oz, ov) = (p.n0, p.omega_z, p.omega_v);
    let Store4 {
        x, y, z, v, k, h, ..
    } = *s;
    let mut out = vec![
        (
            "growthAD",
            0,
            p.alpha_x * (p.k1 + (1.0 - p.k1) * z / (z + p.k2 * oz)) * x,
        ),
        (
            "deathAD",
            0,
            p.beta_x * (p.k3 + (1.0 - p.k3) * z / (z + p.k4 * oz)) * x,
        ),
        ("growthAI", 0, p.alpha_y * (1.0 - p.d * z / (p.z0 * oz)) * y),
        ("deathAI", 0, p.beta_y * y),
        ("mutateADtoAI", 0, nx * p.m1 * (1.0 - z / (p.z0 * oz))),
        ("degradeANDH", 0, z / p.tau),
    ];
    out.push(("producePSA", 0, (1.0 + 2.0 * h) * ov * (x + y) / nx));
    out.push(("producePSA_emit", 0, k * ov * (x + y) / nx));
    out.push(("degradePSA", 0, v));
    out.push(("produceANDHc", 0, p.z0 * oz / p.tau));
    out.push(("produceANDHc", 1, 0.0));
    out.push(("produceANDH", 0, 0.0));
    out.push(("hidden", 0, 2.0));
    out.push(("hidden", 1, 2.0));
    out
}

#[derive(Clone, Copy)]
struct Store4 {
    x: f64,
    y: f64,
    z: f64,
    v: f64,
    u: f64,
    k: f64,
    h: f64,
}

#[test]
fn rate_table_matches_independent_formulas() {
    let params = ProstateParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for policy in POLICIES {
        for variant in VARIANTS {
            let prog = build_prostate_program(&params, policy, variant).unwrap();
            for _ in 0..100 {
                let s = Store4 {
                    x: rng.random_range(0.0..3e6_f64).round(),
                    y: rng.random_range(0.0..3e6_f64).round(),
                    z: rng.random_range(0.0..2e6_f64).round(),
                    v: rng.random_range(0.0..6e6_f64).round(),
                    u: rng.random_range(0..2) as f64,
                    k: rng.random_range(0.0..2.0),
                    h: rng.random_range(0..2) as f64,
                };
                let mut values = prog.initial_store().values;
                let mut set = |name: &str, val: f64| {
                    if let Some(id) = prog.var_id(name) {
                        values[id.index()] = val;
                    }
                };
                set("X", s.x);
                set("Y", s.y);
                set("Z", s.z);
                set("V", s.v);
                set("U", s.u);
                set("K", s.k);
                set("H", s.h);
                let mut checked = 0;
                for (agent, branch, want) in oracle_rates(&params, &s) {
                    if prog.definition(agent).is_none() {
                        continue;
                    }
                    // the hidden multiplier only exists in that variant
                    let want = if agent == "producePSA" && variant != Variant::HiddenSwitch {
                        want / (1.0 + 2.0 * s.h)
                    } else {
                        want
                    };
                    let got = rate(&prog, agent, branch, &values);
                    assert!(
                        close(got, want, 1e-12),
                        "{policy:?} {variant:?} {agent}.{branch}: {got} vs {want}"
                    );
                    checked += 1;
                }
                let expected = match (policy, variant) {
                    (Policy::Cas, Variant::HiddenSwitch) => 11,
                    (Policy::Ias, Variant::HiddenSwitch) => 12,
                    (Policy::Cas, _) => 9,
                    (Policy::Ias, _) => 10,
                };
                assert_eq!(checked, expected, "{policy:?} {variant:?}");
            }
        }
    }
}

#[test]
fn fluid_drift_matches_reference_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for scale in [1e2, 1e5] {
        let params = ProstateParams::default().with_scaling(scale);
        for policy in POLICIES {
            let prog = build_prostate_program(&params, policy, Variant::Base).unwrap();
            let ext = extend_program(&prog).unwrap();
            let pv = PartitionVector::all_continuous(&ext.components);
            let t = compile_program(&ext, &pv).unwrap();
            let drift = drift_field(&t, t.init_mode);
            let oracle = reference_ode_field(&params, policy);
            let id = |n: &str| t.var_id(n).unwrap().index();
            let (ix, iy, iz, iv) = (id("X"), id("Y"), id("Z"), id("V"));
            for _ in 0..200 {
                let s = [
                    rng.random_range(0.01..30.0),
                    rng.random_range(0.01..30.0),
                    rng.random_range(0.01..25.0),
                    rng.random_range(0.01..40.0),
                ];
                let u = match policy {
                    Policy::Cas => 1.0,
                    Policy::Ias => rng.random_range(0..2) as f64,
                };
                let mut values = t.initial_values();
                values[ix] = s[0] * params.n0;
                values[iy] = s[1] * params.n0;
                values[iz] = s[2] * params.omega_z;
                values[iv] = s[3] * params.omega_v;
                if policy == Policy::Ias {
                    values[id("U")] = u;
                }
                let d = drift.eval(&values);
                let got = [
                    d[ix] / params.n0,
                    d[iy] / params.n0,
                    d[iz] / params.omega_z,
                    d[iv] / params.omega_v,
                ];
                let want = oracle.derivative(&s, u);
                for i in 0..4 {
                    assert!(
                        close(got[i], want[i], 1e-9),
                        "{policy:?} component {i} at {s:?}: {} vs {}",
                        got[i],
                        want[i]
                    );
                }
            }
        }
    }
}
