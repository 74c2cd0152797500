//! Text renderings of run results.

use std::fmt::Write as _;

use pondctl_core::{ControlLevels, OdeTrajectory, SimulationRun, StepDiagnostics};

/// `%g`-style formatting with `digits` significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn push_row(out: &mut String, fields: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in fields {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&format_sig(v, 6));
    }
    out.push('\n');
}

fn header(out: &mut String, lead: &[&str], groups: &[&str], n: usize) {
    let mut cols: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    for g in groups {
        cols.extend((1..=n).map(|j| format!("{g}_{j}")));
    }
    out.push_str(&cols.join(","));
    out.push('\n');
}

/// `t,x,w_1..w_N,u_1..u_N`, one row per stored level and node.
pub fn field_csv(run: &SimulationRun) -> String {
    let n = run.terminal().n_species();
    let mut out = String::new();
    header(&mut out, &["t", "x"], &["w", "u"], n);
    for (field, u) in run.snapshots.iter().zip(&run.controls) {
        for (s, x) in run.grid.nodes().enumerate() {
            let w = (0..n).map(|j| field.species(j)[s]);
            let h = u.iter().map(|row| row[s]);
            push_row(&mut out, [field.time(), x].into_iter().chain(w).chain(h));
        }
    }
    out
}

/// `t,inner_iterations,residual,controlled_nodes_1..N`, one row per step.
pub fn diagnostics_csv(diagnostics: &[StepDiagnostics], n_species: usize) -> String {
    let mut out = String::new();
    header(
        &mut out,
        &["t", "inner_iterations", "residual"],
        &["controlled_nodes"],
        n_species,
    );
    for d in diagnostics {
        let counts = d.controlled_node_count.iter().map(|&c| c as f64);
        push_row(
            &mut out,
            [d.time, d.inner_iterations as f64, d.final_residual]
                .into_iter()
                .chain(counts),
        );
    }
    out
}

/// `t,w_1..w_N,u_1..u_N` for every `stride`-th sample plus the last one.
pub fn trajectory_csv(traj: &OdeTrajectory, stride: usize) -> String {
    let n = traj.terminal().len();
    let mut out = String::new();
    header(&mut out, &["t"], &["w", "u"], n);
    let last = traj.times.len().saturating_sub(1);
    for i in (0..traj.times.len()).filter(|&i| i % stride.max(1) == 0 || i == last) {
        push_row(
            &mut out,
            std::iter::once(traj.times[i])
                .chain(traj.states[i].iter().copied())
                .chain(traj.controls[i].iter().copied()),
        );
    }
    out
}

/// Human-readable levels, four decimals.
pub fn levels_text(name: &str, levels: &ControlLevels) -> String {
    let mut out = format!("scenario: {name}\n");
    for j in 0..levels.n_species() {
        let _ = writeln!(
            out,
            "species {}: xi = {:.4}  P = {:.4}  w* = {:.4}  u* = {:.4}",
            j + 1,
            levels.xi[j],
            levels.p[j],
            levels.w_star[j],
            levels.u_star[j]
        );
    }
    out
}

/// Same numbers as [`levels_text`] at full precision.
pub fn levels_csv(levels: &ControlLevels) -> String {
    let mut out = String::from("species,xi,p,w_star,u_star\n");
    for j in 0..levels.n_species() {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?}",
            j + 1,
            levels.xi[j],
            levels.p[j],
            levels.w_star[j],
            levels.u_star[j]
        );
    }
    out
}

/// gnuplot script drawing each density surface from `field.csv`.
pub fn plot_script(name: &str, n_species: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {name}: density surfaces from field.csv");
    out.push_str(
        "set datafile separator ','\n\
         set xlabel 'x (m)'\n\
         set ylabel 't (days)'\n\
         set zlabel 'w'\n\
         set ticslevel 0\n\
         set terminal pngcairo size 900,700\n",
    );
    for j in 1..=n_species {
        let _ = writeln!(out, "set output 'w_{j}.png'");
        let _ = writeln!(out, "set title '{name}: w_{j}(x,t)'");
        let _ = writeln!(
            out,
            "splot 'field.csv' skip 1 using 2:1:{} with points pointtype 7 pointsize 0.2 palette notitle",
            j + 2
        );
    }
    out
}
