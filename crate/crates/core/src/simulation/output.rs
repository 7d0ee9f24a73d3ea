//! CSV and plotting-script writers. Floats use a fixed six-decimal format so
//! output is byte-stable for a given seed.

use std::io::{self, Write};

use super::cost::CostResults;
use super::state::StateResults;

/// `policy,cluster,trial,audits`, one row per trial.
pub fn write_cost_csv<W: Write>(results: &CostResults, mut out: W) -> io::Result<()> {
    writeln!(out, "policy,cluster,trial,audits")?;
    for run in &results.runs {
        for (i, a) in run.audits.iter().enumerate() {
            writeln!(out, "{},{},{i},{a}", run.policy, run.cluster_size)?;
        }
    }
    Ok(())
}

/// `policy,cluster,trials,mean,variance,std_error`.
pub fn write_cost_summary_csv<W: Write>(results: &CostResults, mut out: W) -> io::Result<()> {
    writeln!(out, "policy,cluster,trials,mean,variance,std_error")?;
    for run in &results.runs {
        let s = &run.summary;
        writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6}",
            run.policy, run.cluster_size, s.n, s.mean, s.variance, s.std_error
        )?;
    }
    Ok(())
}

/// `policy,step,mean_m,mean_R,live_count`: per-step means across trials.
pub fn write_state_series_csv<W: Write>(results: &StateResults, mut out: W) -> io::Result<()> {
    writeln!(out, "policy,step,mean_m,mean_R,live_count")?;
    for run in &results.runs {
        for s in 0..run.mean_m.len() {
            writeln!(
                out,
                "{},{s},{:.6},{:.6},{:.6}",
                run.policy, run.mean_m[s], run.mean_r[s], run.mean_live[s]
            )?;
        }
    }
    Ok(())
}

/// One row per trial with the facts extracted from its series.
pub fn write_state_trials_csv<W: Write>(results: &StateResults, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "policy,trial,initial_m,final_m,min_R,min_step,final_R,final_live,live_nonincreasing,dip_recovered,recovery_step"
    )?;
    for run in &results.runs {
        for (i, t) in run.trials.iter().enumerate() {
            writeln!(
                out,
                "{},{i},{:.6},{:.6},{:.6},{},{:.6},{},{},{},{}",
                run.policy,
                t.initial_m,
                t.final_m,
                t.min_r,
                t.min_step,
                t.final_r,
                t.final_live,
                t.live_nonincreasing,
                t.dip_recovered,
                t.recovery_step
            )?;
        }
    }
    Ok(())
}

/// `policy,trials,frac_m_dropped,frac_dip_recovered,frac_live_nonincreasing,mean_recovery_step`.
pub fn write_state_summary_csv<W: Write>(results: &StateResults, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "policy,trials,frac_m_dropped,frac_dip_recovered,frac_live_nonincreasing,mean_recovery_step"
    )?;
    for run in &results.runs {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            run.policy,
            run.trials.len(),
            run.fraction(|t| t.final_m < t.initial_m),
            run.fraction(|t| t.dip_recovered),
            run.fraction(|t| t.live_nonincreasing),
            run.mean_recovery_step()
        )?;
    }
    Ok(())
}

/// Gnuplot script drawing mean cost per policy against cluster size from
/// the summary CSV.
pub fn write_cost_plot<W: Write>(results: &CostResults, summary_csv: &str, mut out: W) -> io::Result<()> {
    writeln!(out, "set datafile separator ','")?;
    writeln!(out, "set terminal pngcairo size 800,500")?;
    writeln!(out, "set output 'cost.png'")?;
    writeln!(out, "set xlabel 'cluster size'")?;
    writeln!(out, "set ylabel 'audits to expel all fog nodes'")?;
    writeln!(out, "set key top left")?;
    let mut policies = Vec::new();
    for r in &results.runs {
        if !policies.contains(&r.policy) {
            policies.push(r.policy);
        }
    }
    let plots: Vec<String> = policies
        .iter()
        .map(|p| {
            format!(
                "'{summary_csv}' using (strcol(1) eq '{p}' ? $2 : 1/0):4:(sqrt($5)) \
                 with yerrorlines title '{p}'"
            )
        })
        .collect();
    writeln!(out, "plot {}", plots.join(", \\\n     "))
}

/// Gnuplot script drawing the mean malicious rate, mean reputation and live
/// count series per policy.
pub fn write_state_plot<W: Write>(results: &StateResults, series_csv: &str, mut out: W) -> io::Result<()> {
    writeln!(out, "set datafile separator ','")?;
    writeln!(out, "set terminal pngcairo size 800,900")?;
    writeln!(out, "set output 'state.png'")?;
    writeln!(out, "set multiplot layout 3,1")?;
    writeln!(out, "set xlabel 'audit step'")?;
    for (column, label) in [(3, "mean malicious rate"), (4, "mean reputation"), (5, "live fog nodes")] {
        writeln!(out, "set ylabel '{label}'")?;
        let plots: Vec<String> = results
            .runs
            .iter()
            .map(|r| {
                format!(
                    "'{series_csv}' using (strcol(1) eq '{p}' ? $2 : 1/0):{column} with lines title '{p}'",
                    p = r.policy
                )
            })
            .collect();
        writeln!(out, "plot {}", plots.join(", \\\n     "))?;
    }
    writeln!(out, "unset multiplot")
}
