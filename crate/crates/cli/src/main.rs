use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use packsim_core::output::{csv as csv_out, table};
use packsim_core::planner::{verify_rank, PlannerConstraints, VerifyOptions};
use packsim_core::run::{
    compare_csv, compare_svg, run_compare, run_plan, run_simulate, series_csv,
};
use packsim_core::{RunOutcome, Scenario, Topology};

#[derive(Parser)]
#[command(
    name = "packsim",
    version,
    about = "Battery-pack charge/discharge simulator and S×P planner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one pack and report its charge time.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Scenario file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Pack name such as 92S9P, overriding the scenario's pack.
        #[arg(long)]
        pack: Option<Topology>,
    },
    /// Simulate several packs side by side.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Scenario files; repeatable.
        #[arg(long)]
        config: Vec<PathBuf>,
        /// Pack names run on the first scenario's cell and charger; repeatable.
        #[arg(long)]
        pack: Vec<Topology>,
        /// Run scenarios one after another instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Rank every S×P arrangement of a cell budget by predicted charge time.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Scenario file supplying the cell and charger.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of cells to arrange.
        #[arg(long)]
        cells: u64,
        /// Charger voltage ceiling, V.
        #[arg(long)]
        v_max: Option<f64>,
        /// Supply power ceiling, W.
        #[arg(long)]
        power_max: Option<f64>,
        /// Re-simulate the best K feasible entries and report the deltas.
        #[arg(long, value_name = "K")]
        verify: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Simulation step, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Run length, h.
    #[arg(long = "duration-h")]
    duration_h: Option<f64>,
    /// `paper` selects CC-only charging with the calibrated charge acceptance
    /// and full-range cycling.
    #[arg(long, value_enum, default_value_t = Profile::Default)]
    profile: Profile,
    /// Charge and discharge current, A.
    #[arg(long)]
    current: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Table,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    Paper,
    Default,
}

impl Common {
    fn apply(&self, mut scenario: Scenario) -> Result<Scenario> {
        if let Some(dt) = self.dt {
            scenario.sim.dt = dt;
        }
        if let Some(h) = self.duration_h {
            scenario.sim.duration_h = h;
        }
        if let Some(i) = self.current {
            scenario.charger = scenario.charger.with_current(i);
        }
        if self.profile == Profile::Paper {
            scenario.charger = scenario.charger.with_paper_calibration();
        }
        scenario.validate()?;
        Ok(scenario)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => io::stdout()
                .write_all(text.as_bytes())
                .context("writing to stdout"),
        }
    }
}

fn load(path: &Path) -> Result<Scenario> {
    Scenario::load(path).with_context(|| format!("scenario {}", path.display()))
}

fn base_scenario(config: Option<&Path>) -> Result<Scenario> {
    match config {
        Some(path) => load(path),
        None => Ok(Scenario::for_pack(Topology { s: 92, p: 9 })),
    }
}

fn with_pack(mut scenario: Scenario, pack: Topology) -> Scenario {
    scenario.name = pack.to_string();
    scenario.pack = packsim_core::PackSource::Named(pack);
    scenario
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn simulate(common: &Common, config: Option<PathBuf>, pack: Option<Topology>) -> Result<()> {
    let mut scenario = base_scenario(config.as_deref())?;
    if let Some(p) = pack {
        scenario = with_pack(scenario, p);
    }
    let scenario = common.apply(scenario)?;
    let outcome = run_simulate(&scenario)?;
    let report = table::reports(std::slice::from_ref(&outcome.report));
    match common.format {
        Format::Table => common.emit(&report),
        Format::Json => common.emit(&json(&outcome.report)?),
        Format::Csv | Format::Svg => {
            let body = if common.format == Format::Csv {
                series_csv(&outcome)
            } else {
                compare_svg(&[&outcome])
            };
            common.emit(&body)?;
            if common.out.is_some() {
                print!("{report}");
            }
            Ok(())
        }
    }
}

fn compare(
    common: &Common,
    configs: Vec<PathBuf>,
    packs: Vec<Topology>,
    serial: bool,
) -> Result<bool> {
    if configs.is_empty() && packs.is_empty() {
        bail!("compare needs at least one --config or --pack");
    }
    // (label, scenario or the error that prevented building it)
    let mut prepared: Vec<(String, Result<Scenario>)> = Vec::new();
    for path in &configs {
        prepared.push((
            path.display().to_string(),
            load(path).and_then(|s| common.apply(s)),
        ));
    }
    if !packs.is_empty() {
        let base = match configs.first() {
            Some(path) => load(path)?,
            None => Scenario::for_pack(packs[0]),
        };
        for &pack in &packs {
            prepared.push((
                pack.to_string(),
                common.apply(with_pack(base.clone(), pack)),
            ));
        }
    }

    let runnable: Vec<Scenario> = prepared
        .iter()
        .filter_map(|(_, s)| s.as_ref().ok().cloned())
        .collect();
    let mut results = run_compare(&runnable, !serial).into_iter();

    let mut ok: Vec<RunOutcome> = Vec::new();
    let mut failed: Vec<(String, String)> = Vec::new();
    for (label, scenario) in prepared {
        match scenario {
            Err(e) => failed.push((label, format!("{e:#}"))),
            Ok(s) => match results.next().expect("one result per scenario") {
                Ok(outcome) => ok.push(outcome),
                Err(e) => failed.push((s.name, e.to_string())),
            },
        }
    }

    let refs: Vec<&RunOutcome> = ok.iter().collect();
    let reports: Vec<_> = ok.iter().map(|o| o.report.clone()).collect();
    let summary = table::reports(&reports);
    match common.format {
        Format::Table => common.emit(&summary)?,
        Format::Json => common.emit(&json(&reports)?)?,
        Format::Csv => common.emit(&compare_csv(&refs))?,
        Format::Svg => common.emit(&compare_svg(&refs))?,
    }
    if common.out.is_some() && matches!(common.format, Format::Csv | Format::Svg) {
        print!("{summary}");
    }
    if !failed.is_empty() {
        eprint!(
            "{}",
            table::failures(failed.iter().map(|(n, e)| (n.as_str(), e.clone())))
        );
    }
    Ok(failed.is_empty())
}

fn plan(
    common: &Common,
    config: Option<PathBuf>,
    cells: u64,
    v_max: Option<f64>,
    power_max: Option<f64>,
    verify: Option<usize>,
) -> Result<()> {
    let scenario = common.apply(base_scenario(config.as_deref())?)?;
    let profile = scenario.charger.clone();
    let constraints = PlannerConstraints {
        i_max: profile.i_charge,
        v_max,
        power_max,
        require_cell_conservation: true,
    };
    let plan = run_plan(cells, &scenario.cell, &profile, &constraints)?;
    let checks = match verify {
        Some(k) => Some(verify_rank(
            &plan,
            &scenario.cell,
            &profile,
            VerifyOptions {
                top_k: k,
                dt: scenario.sim.dt,
                parallel: true,
            },
        )?),
        None => None,
    };
    let body = match common.format {
        Format::Table => {
            let mut text = table::plan(&plan);
            if let Some(checks) = &checks {
                text.push('\n');
                text.push_str(&table::discrepancies(checks));
            }
            text
        }
        Format::Json => json(&serde_json::json!({ "plan": plan, "verification": checks }))?,
        Format::Csv => {
            let mut buf = Vec::new();
            csv_out::write_plan(&mut buf, &plan)?;
            String::from_utf8(buf)?
        }
        Format::Svg => bail!("plan has no SVG output; use --format table, csv or json"),
    };
    common.emit(&body)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            common,
            config,
            pack,
        } => simulate(&common, config, pack).map(|_| true),
        Command::Compare {
            common,
            config,
            pack,
            serial,
        } => compare(&common, config, pack, serial),
        Command::Plan {
            common,
            config,
            cells,
            v_max,
            power_max,
            verify,
        } => plan(&common, config, cells, v_max, power_max, verify).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
