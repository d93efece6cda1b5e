use serde_json::{json, Value};

use qiope::fps::{fps_is_positive, fps_sqrt, FormalPowerSeries};
use qiope::freefield::{multi_species_bound, qei_bound, verify_qei, wick_square_bound, VerifyConfig};
use qiope::mesoscopic::{convergence_check, standard_probes, MesoscopicConfig};
use qiope::positivity::{certify_average, certify_pointwise};
use qiope::report::{format_float, json_float, to_json_string};
use qiope::sampling::{sampling_single, wigner, SamplingOptions, WignerGrid};
use qiope::{Kernel, TestFunction};

use crate::config::{Command, RunConfig};
use crate::CliError;

/// What a command produced: the main output, diagnostics for stderr, and
/// whether every check it ran passed.
pub struct Output {
    pub body: String,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl Output {
    fn ok(body: String) -> Self {
        Output {
            body,
            notes: Vec::new(),
            passed: true,
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.command {
        Command::Bound => bound(cfg),
        Command::Sampling => sampling(cfg),
        Command::Wigner => wigner_table(cfg),
        Command::VerifyQei => verify(cfg),
        Command::Mesoscopic => mesoscopic(cfg),
        Command::Certify => certify(cfg),
        Command::Fps => fps(cfg),
    }
}

fn require<'a>(v: &'a Option<Value>, flag: &str) -> Result<&'a Value, CliError> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn test_function(v: &Option<Value>, flag: &str) -> Result<TestFunction, CliError> {
    Ok(TestFunction::from_json(require(v, flag)?)?)
}

fn positive_count(v: Option<usize>, flag: &str, default: usize) -> Result<usize, CliError> {
    match v {
        Some(0) => Err(CliError::Usage(format!("--{flag} must be positive"))),
        Some(n) => Ok(n),
        None => Ok(default),
    }
}

fn positive_tol(v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(CliError::Usage(format!("--tol must be positive, got {t}"))),
        other => Ok(other),
    }
}

/// `--kernel`, or the homogeneous kernel of degree `--beta` with unit
/// amplitude.
fn kernel(cfg: &RunConfig) -> Result<Kernel, CliError> {
    match (&cfg.kernel, cfg.beta) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --kernel or --beta, not both".into())),
        (Some(k), None) => Ok(Kernel::from_json(k)?),
        (None, Some(beta)) => Ok(Kernel::from_json(&json!({
            "type": "homogeneous",
            "beta": beta,
            "amplitude": [1.0, 0.0],
        }))?),
        (None, None) => Err(CliError::Usage("--kernel or --beta is required".into())),
    }
}

fn bound(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = test_function(&cfg.g, "g")?;
    let masses = cfg.mass.clone().unwrap_or_else(|| vec![0.0]);
    let mut per_mass = Vec::new();
    for &m in &masses {
        per_mass.push(json!({
            "mass": json_float(m),
            "qei_bound": json_float(qei_bound(&g, m)?),
            "wick_square_bound": json_float(wick_square_bound(&g, m)?),
        }));
    }
    let out = json!({
        "g": g.to_json(),
        "per_mass": per_mass,
        "multi_species_bound": json_float(multi_species_bound(&g, &masses)?),
    });
    Ok(Output::ok(to_json_string(&out)))
}

fn sampling(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = test_function(&cfg.g, "g")?;
    let k = kernel(cfg)?;
    let mut opts = SamplingOptions::default();
    opts.s_points = positive_count(cfg.points, "points", opts.s_points)?;
    if let Some(t) = positive_tol(cfg.tol)? {
        opts.rel_tol = t;
    }
    let f = sampling_single(&k, &g, &opts)?;
    let mut notes = vec![format!(
        "method {}, error estimate {}",
        f.method.as_str(),
        format_float(f.error_estimate)
    )];
    notes.extend(f.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Output {
        body: f.to_csv(),
        notes,
        passed: true,
    })
}

fn wigner_table(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = test_function(&cfg.g, "g")?;
    let mut grid = WignerGrid::default();
    grid.s_points = positive_count(cfg.points, "points", grid.s_points)?;
    let w = wigner(&g, &grid)?;
    let mut out = Output::ok(w.to_csv());
    if w.aliasing {
        out.notes.push("warning: the s' grid does not resolve g; W is aliased".into());
    }
    Ok(out)
}

fn verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut vc = VerifyConfig::new(test_function(&cfg.g, "g")?);
    if let Some(m) = &cfg.mass {
        vc.masses = m.clone();
    }
    vc.states = positive_count(cfg.states, "states", vc.states)?;
    vc.seed = cfg.seed.unwrap_or(vc.seed);
    vc.tol = positive_tol(cfg.tol)?.unwrap_or(vc.tol);
    let report = verify_qei(&vc)?;
    let mut notes = Vec::new();
    if !report.nontrivial {
        notes.push("note: no state came within 10% of the bound; widen the mode family".into());
    }
    if !report.passed {
        notes.push("FAIL: a state violates the Wick-square bound".into());
    }
    Ok(Output {
        body: report.to_json_string(),
        notes,
        passed: report.passed,
    })
}

fn mesoscopic(cfg: &RunConfig) -> Result<Output, CliError> {
    let d = cfg.d.unwrap_or(1.0);
    let chi = match &cfg.chi {
        Some(v) => TestFunction::from_json(v)?,
        None => TestFunction::standard_bump(),
    };
    let lambdas = cfg
        .lambda_grid
        .clone()
        .unwrap_or_else(|| (3..=8).map(|k| d * 2f64.powi(-k)).collect());
    let mc = MesoscopicConfig {
        chi,
        f: test_function(&cfg.f, "f")?,
        d,
        lambdas,
        kernel: kernel(cfg)?,
    };
    let mut body = String::from("probe,lambda,eta_re,eta_im,raw_pairing,pairing,residual\n");
    let mut notes = Vec::new();
    let mut passed = true;
    for (name, u) in standard_probes(d) {
        let t = convergence_check(&mc, u)?;
        for r in &t.rows {
            let cells: Vec<String> = [r.lambda, r.eta_re, r.eta_im, r.raw_pairing, r.pairing, r.residual]
                .iter()
                .map(|x| format_float(*x))
                .collect();
            body.push_str(&format!("{name},{}\n", cells.join(",")));
        }
        let slope = t.slope.map_or("none".to_string(), format_float);
        notes.push(format!(
            "{} {name}: slope {slope}, expected {}, hypothesis {}",
            if t.passed { "PASS" } else { "FAIL" },
            format_float(t.expected_slope),
            t.hypothesis
        ));
        passed &= t.passed;
    }
    Ok(Output { body, notes, passed })
}

fn certify(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = test_function(&cfg.g, "g")?;
    let beta = cfg.beta.ok_or_else(|| CliError::Usage("--beta is required".into()))?;
    let pointwise = certify_pointwise(beta, &g);
    let average = if beta <= 0.0 {
        serde_json::to_value(certify_average(beta, &g)?).expect("certificate serializes")
    } else {
        Value::Null
    };
    let out = json!({
        "beta": json_float(beta),
        "g": g.to_json(),
        "pointwise": serde_json::to_value(&pointwise).expect("certificate serializes"),
        "average": average,
    });
    Ok(Output::ok(to_json_string(&out)))
}

fn fps(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = FormalPowerSeries::from_json(require(&cfg.coeffs, "coeffs")?)?;
    let pos = fps_is_positive(&p);
    let (root, reason) = match fps_sqrt(&p) {
        Ok(q) => (json!({"coeffs": q.to_json(), "series": q.to_exact_string()}), Value::Null),
        Err(e) => (Value::Null, Value::String(e.to_string())),
    };
    let out = json!({
        "series": p.to_exact_string(),
        "positive": pos.positive,
        "n": pos.n,
        "d0": json_float(pos.d0),
        "root": root,
        "no_root": reason,
    });
    Ok(Output::ok(to_json_string(&out)))
}
