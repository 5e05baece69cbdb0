//! Batch benchmark CLI for the exploration simulator.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use explore_bench::battery::{discharge_step, draw_current, BatteryParams, BatteryState};
use explore_bench::config::ExperimentConfig;
use explore_bench::envmap::{generate::Category, load_map};
use explore_bench::geom::WorldPoint;
use explore_bench::kpi::compute_kpis;
use explore_bench::runner::{load_environment, run_mission, single_cell_config, StrategyKind};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "explore-bench", about = "Indoor exploration benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment batch from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a single mission and print its indicators.
    Mission {
        /// Bundled map name or path to a .map file.
        #[arg(long)]
        map: String,
        /// Entry point as "x,y".
        #[arg(long)]
        entry: String,
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Validate a map file (or bundled map) and print its stats.
    Validate {
        #[arg(long)]
        map: String,
    },
    /// Print the battery discharge profile at hover and cruise loads.
    CalibrateBattery,
    /// Regenerate the bundled environment maps into a directory.
    GenMaps {
        #[arg(long, default_value = "crates/explore-bench/maps")]
        out: PathBuf,
    },
}

fn parse_entry(s: &str) -> Result<WorldPoint> {
    let (x, y) = s
        .split_once(',')
        .context("entry must be formatted as x,y")?;
    Ok(WorldPoint::new(x.trim().parse()?, y.trim().parse()?))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let summary = explore_bench::runner::run_batch(&cfg, &out)?;
            let failures = summary
                .rows
                .iter()
                .filter(|r| r.status != explore_bench::kpi::MissionStatus::Complete)
                .count();
            println!(
                "batch complete: {} missions ({} non-complete), outputs in {}",
                summary.rows.len(),
                failures,
                out.display()
            );
        }
        Command::Mission {
            map,
            entry,
            strategy,
            seed,
        } => {
            let truth = load_environment(&map)?;
            let entry = parse_entry(&entry)?;
            let kind = StrategyKind::parse(&strategy)
                .with_context(|| format!("unknown strategy '{strategy}'"))?;
            let cfg = single_cell_config(&map, entry, &strategy, 1);
            let result = run_mission(&truth, entry, kind, seed, &cfg)?;
            let kpi = compute_kpis(&result, &truth);
            println!("status: {}", result.status.as_str());
            println!("Ec: {:.2} m", kpi.ec);
            println!("Tt: {:.2} min", kpi.tt);
            println!("Ef: {:.2} m^2/m", kpi.ef);
            println!("Bl: {:.1} %", kpi.bl);
            println!("Mc: {:.3}", kpi.mc);
            println!("decisions: {}", result.decisions);
            println!("compute ops: {}", result.compute_ops);
        }
        Command::Validate { map } => {
            let truth = load_environment(&map)?;
            println!("map: {}", truth.name);
            println!(
                "grid: {} x {} cells at {} m",
                truth.geom.width, truth.geom.height, truth.geom.resolution
            );
            println!("free area: {:.1} m^2", truth.free_area());
            println!(
                "entries: {}",
                truth
                    .entry_points
                    .iter()
                    .map(|p| format!("({}, {})", p.x, p.y))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            println!(
                "connected: {}",
                if truth.fully_connected() { "yes" } else { "no" }
            );
        }
        Command::CalibrateBattery => {
            let p = BatteryParams::default();
            println!("pack: V0 {} V, Q {} Ah, R {} ohm, gamma {}", p.v0, p.capacity_ah, p.resistance, p.gamma);
            println!("hover current: {:.3} A", p.hover_current);
            for (label, v, w) in [("hover", 0.0, 0.0), ("cruise 0.36 m/s", 0.36, 0.0), ("max 0.5 m/s", 0.5, 0.0)] {
                let mut s = BatteryState::full();
                let dt = 1.0;
                let mut t = 0.0;
                while !s.failsafe_triggered(&p) {
                    let i = draw_current(&p, v, w, 0, dt);
                    discharge_step(&mut s, i, dt);
                    t += dt;
                }
                println!("{label}: endurance {:.1} min, final V {:.3}", t / 60.0, s.voltage(&p));
            }
        }
        Command::GenMaps { out } => {
            std::fs::create_dir_all(&out)?;
            // Fixed seeds picked for layout quality; keep in sync with
            // the bundled files.
            let seeds = [
                (Category::Room, 8u64),
                (Category::Apartment, 1),
                (Category::Office, 2),
                (Category::Hallway, 2),
                (Category::MazeHouse, 1),
                (Category::School, 7),
            ];
            for (cat, seed) in seeds {
                let map = explore_bench::envmap::generate::generate_environment(cat, seed)
                    .with_context(|| format!("generating {}", cat.name()))?;
                let text = map.serialize();
                // Round-trip check before writing.
                let reloaded = load_map(&text)?;
                if reloaded.free_cell_count() != map.free_cell_count() {
                    bail!("round-trip mismatch for {}", cat.name());
                }
                let path = out.join(format!("{}.map", cat.name()));
                std::fs::write(&path, text)?;
                println!(
                    "{}: {} ({:.1} m^2 free)",
                    cat.name(),
                    path.display(),
                    map.free_area()
                );
            }
        }
    }
    Ok(())
}
