use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vibrometer_core::encode::encode_with_cap;
use vibrometer_core::format::{fmt_f64, to_json_string};
use vibrometer_core::{
    build_sop, fvci_ground_state, givens, group_variance, random_quartic_pes, reduction_report,
    rotate_coordinates, runtime, ExpandedHamiltonian, GroupingResult, MeasurementPlan, PauliSum,
    QubitLayout, RandomPesConfig, ReportRow, SopHamiltonian, StateSidecar, StateVector, TaylorPes,
};

use crate::files::{check_input, check_output, load_hamiltonian, read_text, write_atomic};
use crate::{
    EncodeArgs, ExpandArgs, GroupArgs, PipelineArgs, PlanArgs, ReportArgs, SynthArgs, VarianceArgs,
};

pub const PIPELINE_CSV_HEADER: &str =
    "label,scheme,groups,sum_sqrt_var,total_shots,circuit_time_us,total_time_min,optimal";

#[derive(Serialize, Deserialize)]
struct VarianceFile {
    scheme: String,
    ground_energy: Option<f64>,
    variances: Vec<f64>,
    sum_sqrt_var: f64,
}

fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim();
    let (number, radians) = if let Some(n) = t.strip_suffix("deg") {
        (n, false)
    } else if let Some(n) = t.strip_suffix("rad") {
        (n, true)
    } else {
        (t, false)
    };
    let v: f64 = number
        .trim()
        .parse()
        .with_context(|| format!("--rotate: cannot parse angle {text:?}"))?;
    if !v.is_finite() {
        bail!("--rotate: angle must be finite");
    }
    Ok(if radians { v } else { v.to_radians() })
}

/// Modes and virtual modals per mode of the UVCCSD circuit model.
fn circuit_size(layout: &QubitLayout) -> (u64, u64) {
    let modals = layout.basis().modals();
    let max = modals.iter().copied().max().unwrap_or(1);
    (modals.len() as u64, max.saturating_sub(1) as u64)
}

fn variances_of(state: &StateVector, groups: &GroupingResult) -> Result<Vec<f64>> {
    Ok(groups
        .groups
        .par_iter()
        .map(|g| group_variance(state, g))
        .collect::<vibrometer_core::Result<Vec<f64>>>()?)
}

pub fn synth(a: SynthArgs) -> Result<()> {
    check_output(&a.output)?;
    if let Some(p) = &a.pes_out {
        check_output(p)?;
    }
    if let Some(p) = &a.pes {
        check_input(p)?;
    }
    let pes = if let Some(freqs) = a.harmonic {
        TaylorPes::harmonic(freqs)?
    } else if let Some(path) = &a.pes {
        TaylorPes::from_json(&read_text(path)?)
            .with_context(|| format!("invalid PES in {}", path.display()))?
    } else {
        let seed = a.random_seed.expect("clap enforces one source");
        random_quartic_pes(&RandomPesConfig {
            modes: a.modes.unwrap_or(3),
            seed,
            ..Default::default()
        })?
    };
    let m = pes.mode_count();
    if let Some(modes) = a.modes {
        if modes != m {
            bail!("--modes is {modes} but the potential has {m} modes");
        }
    }
    let modals = if a.modals.len() == 1 {
        vec![a.modals[0]; m]
    } else {
        a.modals
    };
    let pes = match &a.rotate {
        Some(angle) => {
            let theta = parse_angle(angle)?;
            let [i, j] = a.pair[..] else {
                bail!("--pair needs exactly two modes");
            };
            rotate_coordinates(&pes, &givens(m, i, j, theta)?)?
        }
        None => pes,
    };
    let sop = build_sop(&pes, &modals)?;
    write_atomic(&a.output, sop.to_json()?.as_bytes())?;
    if let Some(p) = &a.pes_out {
        write_atomic(p, pes.to_json()?.as_bytes())?;
    }
    log::info!("wrote {} SOP terms over {m} modes", sop.terms().len());
    Ok(())
}

pub fn expand(a: ExpandArgs) -> Result<()> {
    check_input(&a.input)?;
    check_output(&a.output)?;
    let sop = SopHamiltonian::from_json(&read_text(&a.input)?)
        .with_context(|| format!("invalid SOP Hamiltonian in {}", a.input.display()))?;
    let ham = vibrometer_core::expand(&sop, a.drop_threshold)?;
    write_atomic(&a.output, ham.to_json()?.as_bytes())?;
    log::info!("expanded into {} strings", ham.strings().len());
    Ok(())
}

pub fn encode(a: EncodeArgs) -> Result<()> {
    check_input(&a.input)?;
    check_output(&a.output)?;
    check_output(&a.layout)?;
    let ham = load_hamiltonian(&a.input, 0.0)?;
    let (sum, layout) = encode_with_cap(&ham, a.max_qubits)?;
    write_atomic(&a.output, sum.to_text().as_bytes())?;
    write_atomic(&a.layout, layout.to_json()?.as_bytes())?;
    log::info!("{} Pauli strings on {} qubits", sum.len(), sum.n_qubits());
    Ok(())
}

fn load_pauli_and_layout(pauli: &Path, layout: &Path) -> Result<(PauliSum, QubitLayout)> {
    let sum = PauliSum::from_text(&read_text(pauli)?)
        .with_context(|| format!("invalid Pauli Hamiltonian in {}", pauli.display()))?;
    let layout = QubitLayout::from_json(&read_text(layout)?)
        .with_context(|| format!("invalid layout in {}", layout.display()))?;
    if layout.n_qubits() != sum.n_qubits() {
        bail!(
            "layout describes {} qubits but the Hamiltonian has {}",
            layout.n_qubits(),
            sum.n_qubits()
        );
    }
    Ok((sum, layout))
}

pub fn group(a: GroupArgs) -> Result<()> {
    check_input(&a.input)?;
    check_input(&a.layout)?;
    check_output(&a.output)?;
    let (sum, layout) = load_pauli_and_layout(&a.input, &a.layout)?;
    let result = vibrometer_core::group(&sum, &layout, a.scheme)?;
    result.verify(&sum)?;
    write_atomic(&a.output, result.to_json()?.as_bytes())?;
    log::info!(
        "{}: {} terms in {} groups",
        a.scheme,
        sum.len(),
        result.groups.len()
    );
    Ok(())
}

pub fn variance(a: VarianceArgs) -> Result<()> {
    check_input(&a.groups)?;
    for p in [&a.expanded, &a.state].into_iter().flatten() {
        check_input(p)?;
    }
    check_output(&a.output)?;
    if let Some(p) = &a.state_out {
        check_output(p)?;
    }
    let groups = GroupingResult::from_json(&read_text(&a.groups)?)
        .with_context(|| format!("invalid grouping in {}", a.groups.display()))?;
    let (state, ground_energy) = match (&a.expanded, &a.state) {
        (Some(path), _) => {
            let ham = load_hamiltonian(path, 0.0)?;
            let layout = QubitLayout::new(ham.basis());
            let spectrum = fvci_ground_state(&ham, &layout)?;
            log::info!("FVCI ground energy {}", spectrum.ground_energy());
            if let Some(out) = &a.state_out {
                write_state(
                    out,
                    &spectrum.ground_state,
                    &format!(
                        "FVCI ground state of {}, E0 = {}",
                        path.display(),
                        fmt_f64(spectrum.ground_energy())
                    ),
                )?;
            }
            let e = spectrum.ground_energy();
            (spectrum.ground_state, Some(e))
        }
        (None, Some(path)) => {
            let bytes =
                std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
            (StateVector::read_binary(bytes.as_slice())?, None)
        }
        (None, None) => unreachable!("clap requires a wavefunction source"),
    };
    let variances = variances_of(&state, &groups)?;
    let file = VarianceFile {
        scheme: groups.scheme.name().to_string(),
        ground_energy,
        sum_sqrt_var: variances.iter().map(|v| v.sqrt()).sum(),
        variances,
    };
    write_atomic(&a.output, to_json_string(&file)?.as_bytes())?;
    Ok(())
}

fn write_state(path: &Path, state: &StateVector, description: &str) -> Result<()> {
    let mut bytes = Vec::new();
    state.write_binary(&mut bytes)?;
    write_atomic(path, &bytes)?;
    let sidecar = StateSidecar {
        n_qubits: state.n_qubits(),
        seed: None,
        description: description.to_string(),
    };
    let sidecar_path = path.with_file_name(format!(
        "{}.json",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    ));
    write_atomic(&sidecar_path, to_json_string(&sidecar)?.as_bytes())
}

pub fn plan(a: PlanArgs) -> Result<()> {
    for p in [&a.groups, &a.variances, &a.layout] {
        check_input(p)?;
    }
    check_output(&a.output)?;
    if let Some(p) = &a.detail {
        check_output(p)?;
    }
    let groups = GroupingResult::from_json(&read_text(&a.groups)?)
        .with_context(|| format!("invalid grouping in {}", a.groups.display()))?;
    let vars: VarianceFile = serde_json::from_str(&read_text(&a.variances)?)
        .with_context(|| format!("invalid variance file {}", a.variances.display()))?;
    if vars.scheme != groups.scheme.name() {
        bail!(
            "variances were computed for scheme {} but the grouping is {}",
            vars.scheme,
            groups.scheme
        );
    }
    let layout = QubitLayout::from_json(&read_text(&a.layout)?)
        .with_context(|| format!("invalid layout in {}", a.layout.display()))?;
    let (modes, n_virtuals) = circuit_size(&layout);
    let plan = MeasurementPlan::new(groups, vars.variances, a.epsilon)?;
    if let Some(p) = &a.detail {
        write_atomic(p, plan.to_json()?.as_bytes())?;
    }
    let report = runtime(
        &a.label,
        a.molecule.as_deref(),
        plan,
        modes,
        n_virtuals,
        a.tcnot_us,
    )?;
    write_atomic(&a.output, report.summary().to_json()?.as_bytes())?;
    Ok(())
}

pub fn report(a: ReportArgs) -> Result<()> {
    for p in &a.inputs {
        check_input(p)?;
    }
    if let Some(p) = &a.output {
        check_output(p)?;
    }
    let rows = a
        .inputs
        .iter()
        .map(|p| {
            let row = ReportRow::from_json(&read_text(p)?)
                .with_context(|| format!("invalid runtime report {}", p.display()))?;
            let (eps, t) = (
                a.epsilon.unwrap_or(row.epsilon),
                a.tcnot_us.unwrap_or(row.t_cnot_us),
            );
            Ok(row.replan(eps, t)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let reduction = reduction_report(&rows, &a.exclude_label)?;
    let csv = reduction.to_csv();
    if let Some(p) = &a.output {
        write_atomic(p, csv.as_bytes())?;
    }
    if a.csv {
        print!("{csv}");
    } else {
        print!("{}", reduction.to_table());
    }
    Ok(())
}

pub fn pipeline(a: PipelineArgs) -> Result<()> {
    check_input(&a.input)?;
    if let Some(p) = &a.output {
        check_output(p)?;
    }
    for dir in [&a.groups_dir, &a.reports_dir].into_iter().flatten() {
        if !dir.is_dir() {
            bail!("directory {} does not exist", dir.display());
        }
    }
    let ham: ExpandedHamiltonian = load_hamiltonian(&a.input, a.drop_threshold)?;
    let (sum, layout) = encode_with_cap(&ham, a.max_qubits)?;
    let spectrum = fvci_ground_state(&ham, &layout)?;
    let (modes, n_virtuals) = circuit_size(&layout);
    log::info!(
        "{} Pauli strings on {} qubits; FVCI ground energy {}",
        sum.len(),
        sum.n_qubits(),
        spectrum.ground_energy()
    );

    let mut rows = Vec::new();
    for &scheme in &a.scheme {
        let groups = vibrometer_core::group(&sum, &layout, scheme)?;
        groups.verify(&sum)?;
        if let Some(dir) = &a.groups_dir {
            write_atomic(
                &dir.join(format!("groups-{scheme}.json")),
                groups.to_json()?.as_bytes(),
            )?;
        }
        let variances = variances_of(&spectrum.ground_state, &groups)?;
        let plan = MeasurementPlan::new(groups, variances, a.epsilon)?;
        let report = runtime(
            &a.label,
            a.molecule.as_deref(),
            plan,
            modes,
            n_virtuals,
            a.tcnot_us,
        )?;
        let row = report.summary();
        if let Some(dir) = &a.reports_dir {
            write_atomic(
                &dir.join(format!("report-{scheme}.json")),
                row.to_json()?.as_bytes(),
            )?;
        }
        log::info!(
            "{scheme}: {} groups, total shots {}",
            row.groups,
            row.total_shots
        );
        rows.push(row);
    }

    let best = rows
        .iter()
        .map(|r| r.sum_sqrt_var)
        .fold(f64::INFINITY, f64::min);
    let mut csv = String::new();
    let seed = a.seed.map_or("none".to_string(), |s| s.to_string());
    let _ = writeln!(csv, "# seed={seed}");
    let _ = writeln!(
        csv,
        "# molecule={}",
        a.molecule.as_deref().unwrap_or("none")
    );
    let _ = writeln!(
        csv,
        "# epsilon={} t_cnot_us={}",
        fmt_f64(a.epsilon),
        fmt_f64(a.tcnot_us)
    );
    let _ = writeln!(csv, "# ground_energy={}", fmt_f64(spectrum.ground_energy()));
    let _ = writeln!(csv, "{PIPELINE_CSV_HEADER}");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.label,
            r.scheme,
            r.groups,
            fmt_f64(r.sum_sqrt_var),
            r.total_shots,
            fmt_f64(r.circuit_time_us),
            fmt_f64(r.total_time_min),
            r.sum_sqrt_var == best
        );
    }
    match &a.output {
        Some(p) => write_atomic(p, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(())
}
