//! Acceptance run: ten criteria at the default tolerances, one line each.
//!
//! Runs without the libtest harness so the lines are printed on every run.

use std::process::{Command, ExitCode};
use std::time::Instant;

use relcalc::fixtures;
use relcalc::gallery;
use relcalc::stone::{characteristic_matrix, stone_classify};
use relcalc::verify::{run_suite, Suite, SuiteSummary, VerifyOptions};
use relcalc::ToleranceConfig;

const SEED: u64 = 42;
const CASES: usize = 200;
const MAX_DIM: usize = 8;

type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Verdict + 'a>);

struct Verdict {
    passed: bool,
    detail: String,
}

fn suite(s: Suite) -> SuiteSummary {
    let opts = VerifyOptions {
        seed: SEED,
        cases: CASES,
        max_dim: MAX_DIM,
        cfg: ToleranceConfig::default(),
        suites: vec![s],
    };
    run_suite(s, &opts)
}

/// Passes when no case failed and every residual whose name satisfies `pick`
/// stayed under its threshold. `want` residual names must have been seen.
fn judge(summary: &SuiteSummary, pick: impl Fn(&str) -> bool, want: &[&str]) -> Verdict {
    let picked: Vec<_> = summary.worst.iter().filter(|w| pick(&w.name)).collect();
    let missing: Vec<_> = want
        .iter()
        .filter(|n| !picked.iter().any(|w| w.name == **n))
        .collect();
    let worst = picked
        .iter()
        .filter(|w| w.threshold < 0.5)
        .max_by(|a, b| (a.value / a.threshold).total_cmp(&(b.value / b.threshold)));
    let within = picked.iter().all(|w| w.value < w.threshold);
    let mut detail = format!("{}/{} cases", summary.passed, summary.cases);
    if let Some(w) = worst {
        detail += &format!(
            ", worst {} = {:.2e} (< {:.0e})",
            w.name, w.value, w.threshold
        );
    }
    if summary.redraws > 0 {
        detail += &format!(", {} ill-conditioned draws replaced", summary.redraws);
    }
    if !missing.is_empty() {
        detail += &format!(", residuals never computed: {missing:?}");
    }
    Verdict {
        passed: summary.failed == 0
            && summary.cases >= CASES
            && within
            && missing.is_empty()
            && !picked.is_empty(),
        detail,
    }
}

fn all(_: &str) -> bool {
    true
}

fn both(a: Verdict, b: Verdict) -> Verdict {
    Verdict {
        passed: a.passed && b.passed,
        detail: format!("{}; {}", a.detail, b.detail),
    }
}

fn duality() -> Verdict {
    judge(
        &suite(Suite::Duality),
        all,
        &[
            "(ran T)⊥ = ker T*",
            "(dom T)⊥ = mul T*",
            "(ran T*)⊥ = ker T",
            "(dom T*)⊥ = mul T",
        ],
    )
}

fn reconstruction() -> Verdict {
    judge(
        &suite(Suite::Decomposition),
        all,
        &[
            "T_reg + T_sing = T",
            "mul T_sing = mul T",
            "reg(sing T) = 0 on dom T",
            "sing(reg T) = 0 on dom T",
        ],
    )
}

fn class_agreement() -> Verdict {
    judge(
        &suite(Suite::Classify),
        all,
        &[
            "classify = stone_classify",
            "T singular ⇔ T⁻¹ singular",
            "T singular ⇔ T* singular",
        ],
    )
}

fn is_singular_form(name: &str) -> bool {
    name.starts_with("singular:") || name.starts_with("maximal:") || name.starts_with("constructed")
}

fn cross_route(stone: &SuiteSummary) -> Verdict {
    judge(
        stone,
        |n| !is_singular_form(n),
        &[
            "stone.two_route",
            "stone.adjoint_route",
            "stone.inverse_route",
            "stone.parts",
            "stone.kernel_inclusion.ker_r22",
            "stone.adjoint_parts.ker",
        ],
    )
}

fn singular_forms(stone: &SuiteSummary) -> Verdict {
    let cfg = ToleranceConfig::default();
    let random = judge(
        stone,
        is_singular_form,
        &[
            "singular: ‖R̃12‖",
            "singular: block diagonal form",
            "maximal: ‖R̃22 − I‖",
        ],
    );
    // span{e1} × span{e2} and {0} × F² by hand
    let sing = stone_classify(&fixtures::fix_sing(), &cfg).unwrap();
    let r = characteristic_matrix(&fixtures::fix_mul());
    let r22_gap = (r.r22 - nalgebra::DMatrix::<f64>::identity(2, 2)).norm();
    let fixed = Verdict {
        passed: sing.singular
            && sing.r12_norm < 1e-9
            && sing.block_form_distance < 1e-9
            && r22_gap < 1e-9,
        detail: format!(
            "fixtures: ‖R̃12‖ = {:.1e}, block form {:.1e}, ‖R̃22 − I‖ = {:.1e}",
            sing.r12_norm, sing.block_form_distance, r22_gap
        ),
    };
    both(random, fixed)
}

fn metric() -> Verdict {
    let energies = judge(
        &suite(Suite::Metric),
        all,
        &[
            "singular energy, pair 0",
            "regular energy, pair 0",
            "singular energy, pair 1",
            "regular energy, pair 1",
            "singular energy, pair 2",
            "regular energy, pair 2",
        ],
    );
    let closed_form = judge(
        &suite(Suite::ClosedForm),
        all,
        &[
            "closed form = least squares (value)",
            "closed form = least squares (argmin)",
            "argmin = −(I + AᴴA)⁻¹h",
        ],
    );
    both(energies, closed_form)
}

fn closability() -> Verdict {
    judge(
        &suite(Suite::Closability),
        all,
        &["closability defect", "supremum attained"],
    )
}

fn adjoint_constant() -> Verdict {
    judge(
        &suite(Suite::AdjointConstant),
        all,
        &[
            "Rayleigh = ‖(T*)_s g‖ (random g)",
            "in_domain ⇔ g ∈ dom T* (random g)",
            "Rayleigh = ‖(T*)_s g‖ (g ⊥ mul T)",
            "in_domain ⇔ g ∈ dom T* (g ⊥ mul T)",
        ],
    )
}

fn adjoint_parts() -> Verdict {
    judge(
        &suite(Suite::AdjointParts),
        all,
        &[
            "dom (T_reg)* = dom T* ⊕ mul T̄",
            "ker (T_reg)* = ker T* ⊕ mul T̄",
            "dom (T_sing)* = ker (T_sing)* = dom̄ T*",
        ],
    )
}

fn gallery_regression() -> Verdict {
    let cfg = ToleranceConfig::default();
    let mismatched: Vec<&str> = gallery::NAMES
        .iter()
        .copied()
        .filter(|name| {
            !gallery::entry(name, &cfg)
                .and_then(|e| e.passed(&cfg))
                .unwrap_or(false)
        })
        .collect();
    let out = Command::new(env!("CARGO_BIN_EXE_relcalc"))
        .args([
            "verify",
            "--seed",
            "42",
            "--cases",
            "200",
            "--max-dim",
            "8",
            "--suite",
            "all",
        ])
        .arg("--artifact-dir")
        .arg(std::env::temp_dir().join("relcalc-acceptance-witnesses"))
        .env_remove("RELCALC_SEED")
        .env_remove("RELCALC_TOL_EQ")
        .output()
        .expect("relcalc binary runs");
    let code = out.status.code();
    Verdict {
        passed: mismatched.is_empty() && code == Some(0),
        detail: format!(
            "{}/{} entries match, verify --seed 42 --cases 200 --max-dim 8 --suite all exited {:?}",
            gallery::NAMES.len() - mismatched.len(),
            gallery::NAMES.len(),
            code
        ),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let stone = suite(Suite::Stone);
    let criteria: Vec<Criterion> = vec![
        ("duality identities", Box::new(duality)),
        ("decomposition reconstruction", Box::new(reconstruction)),
        ("singularity criteria agree", Box::new(class_agreement)),
        (
            "characteristic matrix cross-route",
            Box::new(|| cross_route(&stone)),
        ),
        ("singular block forms", Box::new(|| singular_forms(&stone))),
        ("metric energies and closed form", Box::new(metric)),
        ("closability defect", Box::new(closability)),
        ("optimal adjoint constant", Box::new(adjoint_constant)),
        ("adjoint part identities", Box::new(adjoint_parts)),
        ("gallery regression", Box::new(gallery_regression)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let v = run();
        failed += usize::from(!v.passed);
        println!(
            "criterion {:>2} {:<34} {}  {}",
            i + 1,
            name,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "acceptance: {} of 10 passed in {:.1?}",
        10 - failed,
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
