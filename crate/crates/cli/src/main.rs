use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phaselab::grid::{GridPoint, GridSpec};
use phaselab::oracle::OracleConfig;
use phaselab::report::{format_float, write_csv, write_json, SweepRecord};
use phaselab::spin::Axis;
use phaselab::sweep::{
    berry_records, group_holonomy, point_records, spectrum_rows, sweep, GroupHolonomy, SpectrumRow,
};
use phaselab::verify::{verify, VerifyConfig, VerifyReport};
use phaselab::PhaseError;

#[derive(Parser, Debug)]
#[command(
    name = "phaselab",
    version,
    about = "Geometric phases of the driven three-qubit LMG model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Numerical tolerance for time stepping and ordered exponentials.
    #[arg(long, global = true, env = "PHASELAB_TOL", default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of the frame generator B and of H~.
    Spectrum(PointArgs),
    /// Aharonov-Anandan phases of every cyclic state.
    Aa {
        #[command(flatten)]
        point: PointArgs,
        /// Only the n-th state (1-based).
        #[arg(long)]
        state: Option<usize>,
        /// Only states of degenerate group 1 or 2.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), conflicts_with = "state")]
        group: Option<u8>,
    },
    /// Adiabatic Berry phases of the eigenstates of H~.
    Berry {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        state: Option<usize>,
    },
    /// Non-abelian geometric factor of a degenerate group.
    Holonomy {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        group: u8,
    },
    /// Phase table over a parameter grid.
    Sweep {
        #[arg(long, value_enum, default_value_t = Model::Z)]
        model: Model,
        #[arg(long, default_value = "default")]
        grid: GridSpec,
    },
    /// Closed forms against the engine and the propagation oracle.
    Verify {
        #[arg(long, default_value = "default")]
        grid: GridSpec,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct PointArgs {
    #[arg(long, value_enum, default_value_t = Model::Z)]
    model: Model,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, allow_negative_numbers = true)]
    h: f64,
    #[arg(long)]
    omega: f64,
}

impl PointArgs {
    fn point(&self) -> GridPoint {
        GridPoint::new(self.gamma, self.h, self.omega)
    }

    fn axis(&self) -> Axis {
        self.model.axis()
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Model {
    Z,
    X,
}

impl Model {
    fn axis(self) -> Axis {
        match self {
            Model::Z => Axis::Z,
            Model::X => Axis::X,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Table,
    Csv,
    Json,
}

enum Failure {
    Usage(String),
    Numerical(PhaseError),
    Verification,
}

impl From<PhaseError> for Failure {
    fn from(e: PhaseError) -> Self {
        match e {
            PhaseError::InvalidArgument(_)
            | PhaseError::Grid(_)
            | PhaseError::IndexOutOfRange { .. } => Failure::Usage(e.to_string()),
            e => Failure::Numerical(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(PhaseError::Output(e.to_string()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out).and_then(|r| {
        out.flush()?;
        Ok(r)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(2),
    }
}

fn run(cli: &Cli, out: &mut impl Write) -> Result<(), Failure> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::Usage(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    match &cli.command {
        Command::Spectrum(p) => {
            let rows = spectrum_rows(p.axis(), &p.point())?;
            emit_spectrum(&rows, cli.format, out)
        }
        Command::Aa {
            point,
            state,
            group,
        } => {
            let mut rows = point_records(point.axis(), &point.point())?;
            if let Some(g) = group {
                let prefix = match point.model {
                    Model::X => format!("B{g}."),
                    Model::Z if *g == 1 => "P+34.".to_string(),
                    Model::Z => "P-34.".to_string(),
                };
                rows.retain(|r| r.state.starts_with(&prefix));
            }
            let rows = select(rows, *state)?;
            emit_records(&rows, cli.format, point.model, out)
        }
        Command::Berry { point, state } => {
            let rows = select(berry_records(point.axis(), &point.point())?, *state)?;
            emit_records(&rows, cli.format, point.model, out)
        }
        Command::Holonomy { point, group } => {
            let hol = group_holonomy(
                point.axis(),
                &point.point(),
                *group as usize,
                cli.tol.min(1e-12),
            )?;
            emit_holonomy(&point.point(), &hol, cli.format, point.model, out)
        }
        Command::Sweep { model, grid } => {
            let points = grid.points()?;
            let rows = sweep(model.axis(), &points, Default::default())?;
            emit_records(&rows, cli.format, *model, out)
        }
        Command::Verify { grid } => {
            let points = grid.points()?;
            let cfg = VerifyConfig {
                oracle: OracleConfig::with_tol(cli.tol),
                ..VerifyConfig::default()
            };
            let report = verify(&points, &cfg);
            emit_report(&report, cli.format, out)?;
            if report.all_pass() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn select(rows: Vec<SweepRecord>, state: Option<usize>) -> Result<Vec<SweepRecord>, Failure> {
    match state {
        None => Ok(rows),
        Some(n) if n >= 1 && n <= rows.len() => Ok(vec![rows[n - 1].clone()]),
        Some(n) => Err(Failure::Usage(format!(
            "--state {n} out of range 1..={}",
            rows.len()
        ))),
    }
}

fn table_note(model: Model, out: &mut impl Write) -> io::Result<()> {
    writeln!(
        out,
        "# model {}: angles in rad, principal values in (-pi, pi]",
        model.axis().symbol()
    )?;
    writeln!(
        out,
        "# H~ omits the constant n(1+gamma)/12 = (1+gamma)/4 for n = 3 qubits"
    )
}

/// Fixed six-decimal rendering without a negative zero.
fn fixed(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    let s = format!("{x:.6}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn sci(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.2e}")
    }
}

fn emit_records(
    rows: &[SweepRecord],
    format: Format,
    model: Model,
    out: &mut impl Write,
) -> Result<(), Failure> {
    match format {
        Format::Csv => write_csv(rows, out)?,
        Format::Json => write_json(rows, out)?,
        Format::Table => {
            table_note(model, out)?;
            writeln!(
                out,
                "{:>6} {:>6} {:>6} {:<8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>9}",
                "gamma",
                "h",
                "omega",
                "state",
                "b_value",
                "theta",
                "total",
                "dynamical",
                "geo_closed",
                "geo_num",
                "residual"
            )?;
            for r in rows {
                writeln!(
                    out,
                    "{:>6} {:>6} {:>6} {:<8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>9}",
                    format_float(r.gamma),
                    format_float(r.h),
                    format_float(r.omega),
                    r.state,
                    fixed(r.b_value),
                    fixed(r.theta),
                    fixed(r.total),
                    fixed(r.dynamical),
                    fixed(r.geometric_closed),
                    fixed(r.geometric_numeric),
                    sci(r.residual)
                )?;
            }
        }
    }
    Ok(())
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        format_float(x)
    } else {
        "null".into()
    }
}

fn emit_spectrum(
    rows: &[SpectrumRow],
    format: Format,
    out: &mut impl Write,
) -> Result<(), Failure> {
    match format {
        Format::Csv => {
            writeln!(out, "operator,index,value,closed,multiplicity")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.operator,
                    r.index,
                    format_float(r.value),
                    format_float(r.closed),
                    r.multiplicity
                )?;
            }
        }
        Format::Json => {
            let items: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "  {{\"operator\": \"{}\", \"index\": {}, \"value\": {}, \"closed\": {}, \"multiplicity\": {}}}",
                        r.operator,
                        r.index,
                        json_num(r.value),
                        json_num(r.closed),
                        r.multiplicity
                    )
                })
                .collect();
            writeln!(out, "[\n{}\n]", items.join(",\n"))?;
        }
        Format::Table => {
            writeln!(
                out,
                "# H~ omits the constant n(1+gamma)/12 = (1+gamma)/4 for n = 3 qubits"
            )?;
            writeln!(
                out,
                "{:<8} {:>5} {:>16} {:>16} {:>5}",
                "operator", "index", "value", "closed", "mult"
            )?;
            for r in rows {
                writeln!(
                    out,
                    "{:<8} {:>5} {:>16} {:>16} {:>5}",
                    r.operator,
                    r.index,
                    format_float(r.value),
                    format_float(r.closed),
                    r.multiplicity
                )?;
            }
        }
    }
    Ok(())
}

fn emit_holonomy(
    p: &GridPoint,
    hol: &GroupHolonomy,
    format: Format,
    model: Model,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let entries: Vec<(String, f64)> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .flat_map(|(i, j)| {
            let z = hol.factor[(i, j)];
            [
                (format!("u{}{}_re", i + 1, j + 1), z.re),
                (format!("u{}{}_im", i + 1, j + 1), z.im),
            ]
        })
        .collect();
    let mut fields: Vec<(String, String)> = vec![
        ("gamma".into(), json_num(p.gamma)),
        ("h".into(), json_num(p.h)),
        ("omega".into(), json_num(p.omega)),
        ("group".into(), hol.group.to_string()),
        ("b_value".into(), json_num(hol.b_value)),
        ("angle_closed".into(), json_num(hol.closed)),
        ("angle_numeric".into(), json_num(hol.numeric)),
        ("residual".into(), json_num(hol.residual())),
        ("scalar_residual".into(), json_num(hol.scalar_residual)),
        ("leakage".into(), json_num(hol.leakage)),
    ];
    fields.extend(entries.iter().map(|(k, v)| (k.clone(), json_num(*v))));
    match format {
        Format::Csv => {
            let keys: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
            let values: Vec<String> = fields
                .iter()
                .map(|(_, v)| {
                    if v == "null" {
                        "NaN".to_string()
                    } else {
                        v.clone()
                    }
                })
                .collect();
            writeln!(out, "{}\n{}", keys.join(","), values.join(","))?;
        }
        Format::Json => {
            let body: Vec<String> = fields
                .iter()
                .map(|(k, v)| format!("\"{k}\": {v}"))
                .collect();
            writeln!(out, "[\n  {{{}}}\n]", body.join(", "))?;
        }
        Format::Table => {
            table_note(model, out)?;
            writeln!(out, "group          {}", hol.group)?;
            writeln!(out, "b_value        {}", fixed(hol.b_value))?;
            writeln!(out, "angle closed   {}", fixed(hol.closed))?;
            writeln!(out, "angle numeric  {}", fixed(hol.numeric))?;
            writeln!(out, "residual       {}", sci(hol.residual()))?;
            writeln!(out, "scalar fit     {}", sci(hol.scalar_residual))?;
            writeln!(out, "leakage        {}", sci(hol.leakage))?;
            writeln!(out, "factor")?;
            for i in 0..2 {
                let row: Vec<String> = (0..2)
                    .map(|j| {
                        let z = hol.factor[(i, j)];
                        let im = fixed(z.im);
                        let (sign, mag) = im
                            .strip_prefix('-')
                            .map_or(("+", im.as_str()), |m| ("-", m));
                        format!("{:>10} {sign} {mag}i", fixed(z.re))
                    })
                    .collect();
                writeln!(out, "  {}", row.join("   "))?;
            }
        }
    }
    Ok(())
}

fn emit_report(report: &VerifyReport, format: Format, out: &mut impl Write) -> Result<(), Failure> {
    let rows: Vec<(u8, &str, &str, f64, f64)> = report
        .criteria
        .iter()
        .map(|c| {
            let (m, t) = c
                .headline()
                .map_or((f64::NAN, f64::NAN), |h| (h.measured, h.tolerance));
            (c.id, c.name, if c.pass() { "PASS" } else { "FAIL" }, m, t)
        })
        .collect();
    match format {
        Format::Table => write!(out, "{}", report.render())?,
        Format::Csv => {
            writeln!(out, "id,name,status,measured,tolerance")?;
            for (id, name, status, m, t) in rows {
                writeln!(
                    out,
                    "{id},{name},{status},{},{}",
                    format_float(m),
                    format_float(t)
                )?;
            }
        }
        Format::Json => {
            let items: Vec<String> = rows
                .iter()
                .map(|(id, name, status, m, t)| {
                    format!(
                        "  {{\"id\": {id}, \"name\": \"{name}\", \"status\": \"{status}\", \"measured\": {}, \"tolerance\": {}}}",
                        json_num(*m),
                        json_num(*t)
                    )
                })
                .collect();
            writeln!(out, "[\n{}\n]", items.join(",\n"))?;
        }
    }
    Ok(())
}
