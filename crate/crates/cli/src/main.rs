use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lvform::embed::{aux_initial_state, check_positivity_general, introduce_aux, recast, AuxSpec, GeneralSystem};
use lvform::examples;
use lvform::expr::{self, Bindings};
use lvform::io::{
    aux_from_inline, aux_from_json, bec_to_json, detect_kind, lv_from_json, lv_to_json, parse_general, qp_from_json,
    qp_to_json, report_to_json, to_canonical_string, FileKind, FormatError, LoadedGeneral,
};
use lvform::qp::check_bec;
use lvform::sim::{integrate, verify_recast, GeneralField, GlvField, IntegratorConfig, LvField, VectorField};
use lvform::{Error, ErrorKind};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lvform", version, about = "Recast ODE systems into generalized and classical Lotka-Volterra form")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct ModelArgs {
    /// Override a model parameter, e.g. `--param alpha=0.5`.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_binding)]
    params: Vec<(String, f64)>,
    /// Auxiliary variables: an aux JSON file, or inline `[function:]q=Q,p=P1;P2`.
    #[arg(long, value_name = "SPEC")]
    aux: Vec<String>,
}

#[derive(clap::Args, Clone, Copy)]
struct TimeArgs {
    #[arg(long, default_value_t = 0.0, value_parser = parse_real)]
    t0: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_real)]
    t1: f64,
    #[arg(long, default_value_t = 1e-4, value_parser = parse_real)]
    dt: f64,
    /// Keep every N-th step.
    #[arg(long, default_value_t = 10)]
    record_every: usize,
}

impl TimeArgs {
    fn config(self) -> IntegratorConfig {
        IntegratorConfig { t0: self.t0, t1: self.t1, dt: self.dt, record_every: self.record_every }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Stage {
    Original,
    Glv,
    Lv,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model, GLV or LV file and report its structure.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Introduce auxiliary variables and write the GLV system.
    Embed {
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the Lotka-Volterra normal form of a GLV system, or of a model
    /// after embedding it.
    Lv {
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two GLV systems are related by a quasimonomial transformation.
    CheckBec {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a system and write the trajectory as CSV.
    Simulate {
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        time: TimeArgs,
        /// For model files: which stage of the pipeline to integrate.
        #[arg(long, value_enum, default_value_t = Stage::Original)]
        stage: Stage,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a model and its LV form and compare the trajectories.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        time: TimeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a bundled example model and its default aux file.
    Examples {
        name: String,
        /// Directory to write into.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn parse_real(s: &str) -> Result<f64, String> {
    expr::eval(s, &Bindings::new()).map_err(|e| e.to_string())
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    Ok((name.trim().to_string(), parse_real(value)?))
}

fn read_input(path: &Path) -> Result<String, Error> {
    let io_err = |source| Error::Io { path: path.display().to_string(), source };
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).map_err(io_err)?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(io_err)
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn load_model(text: &str, args: &ModelArgs) -> Result<LoadedGeneral, Error> {
    let overrides: Bindings = args.params.iter().cloned().collect();
    Ok(parse_general(text, &overrides)?)
}

fn aux_spec(args: &ModelArgs, sys: &GeneralSystem) -> Result<AuxSpec, Error> {
    match args.aux.as_slice() {
        [] => Ok(AuxSpec::simplest(sys.n(), sys.r())),
        [single] if Path::new(single).is_file() => Ok(aux_from_json(&read_input(Path::new(single))?, sys)?),
        many => Ok(aux_from_inline(many, sys)?),
    }
}

fn validate(input: &Path, model: &ModelArgs) -> Result<(Value, bool), Error> {
    let text = read_input(input)?;
    match detect_kind(&text)? {
        FileKind::General => {
            let loaded = load_model(&text, model)?;
            let spec = aux_spec(model, &loaded.system)?;
            let translated = match loaded.shift_ref() {
                Some((c, k)) => lvform::embed::positivity_translate(&loaded.system, c, k)?,
                None => loaded.system.clone(),
            };
            let positive = check_positivity_general(&translated, &translated.initial_vector())
                && aux_initial_state(&translated, &spec).is_some();
            let glv = introduce_aux(&translated, &spec)?;
            let report = glv.validate();
            let mut issues = report.issues.clone();
            if !positive {
                issues.push("initial state is not strictly positive; add or enlarge \"translate\"".into());
            }
            let valid = issues.is_empty();
            Ok((
                json!({
                    "kind": "general",
                    "valid": valid,
                    "n": translated.n(),
                    "functions": translated.family.functions.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
                    "translated": loaded.shift.is_some(),
                    "positive": positive,
                    "m": report.m,
                    "rank": report.rank,
                    "issues": issues,
                }),
                valid,
            ))
        }
        FileKind::Glv => {
            let sys = qp_from_json(&text)?;
            let report = sys.validate();
            let valid = report.is_valid();
            Ok((
                json!({
                    "kind": "glv",
                    "valid": valid,
                    "n": report.n,
                    "m": report.m,
                    "rank": report.rank,
                    "duplicate_rows": report.duplicate_rows,
                    "zero_rows": report.zero_rows,
                    "issues": report.issues,
                }),
                valid,
            ))
        }
        FileKind::Lv => {
            let lv = lv_from_json(&text)?;
            Ok((json!({"kind": "lv", "valid": true, "m": lv.m(), "issues": []}), true))
        }
    }
}

fn simulate(input: &Path, model: &ModelArgs, cfg: &IntegratorConfig, stage: Stage) -> Result<String, Error> {
    let text = read_input(input)?;
    let missing_x0 = || Error::Format(FormatError::Schema("file has no initial state".into()));
    let trajectory = match detect_kind(&text)? {
        FileKind::General => {
            let loaded = load_model(&text, model)?;
            match stage {
                Stage::Original => {
                    let sys = &loaded.system;
                    integrate(&GeneralField::unconstrained(sys), &sys.initial_vector(), cfg)?
                }
                Stage::Glv | Stage::Lv => {
                    let spec = aux_spec(model, &loaded.system)?;
                    let r = recast(&loaded.system, loaded.shift_ref(), &spec)?;
                    if stage == Stage::Glv {
                        let x0 = r.glv.initial_state.clone().ok_or_else(missing_x0)?;
                        integrate(&GlvField::new(&r.glv), &x0, cfg)?
                    } else {
                        let z0 = r.lv.z0.clone().ok_or_else(missing_x0)?;
                        integrate(&LvField::new(&r.lv), &z0, cfg)?
                    }
                }
            }
        }
        FileKind::Glv => {
            let sys = qp_from_json(&text)?;
            let x0 = sys.initial_state.clone().ok_or_else(missing_x0)?;
            integrate(&GlvField::new(&sys), &x0, cfg)?
        }
        FileKind::Lv => {
            let lv = lv_from_json(&text)?;
            let z0 = lv.z0.clone().ok_or_else(missing_x0)?;
            let field: &dyn VectorField = &LvField::new(&lv);
            integrate(field, &z0, cfg)?
        }
    };
    if let Some(warning) = &trajectory.warning {
        eprintln!("warning: {warning}");
    }
    Ok(trajectory.to_csv())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate { input, model, out } => {
            let (report, valid) = validate(&input, &model)?;
            write_output(out.as_deref(), &to_canonical_string(&report))?;
            Ok(if valid { ExitCode::SUCCESS } else { ExitCode::from(ErrorKind::Validation.exit_code() as u8) })
        }
        Command::Embed { input, model, out } => {
            let loaded = load_model(&read_input(&input)?, &model)?;
            let spec = aux_spec(&model, &loaded.system)?;
            let r = recast(&loaded.system, loaded.shift_ref(), &spec)?;
            if r.glv.initial_state.is_none() {
                eprintln!("warning: initial state is not strictly positive after translation; x0 omitted");
            }
            write_output(out.as_deref(), &to_canonical_string(&qp_to_json(&r.glv)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Lv { input, model, out } => {
            let text = read_input(&input)?;
            let lv = match detect_kind(&text)? {
                FileKind::General => {
                    let loaded = load_model(&text, &model)?;
                    let spec = aux_spec(&model, &loaded.system)?;
                    recast(&loaded.system, loaded.shift_ref(), &spec)?.lv
                }
                FileKind::Glv => qp_from_json(&text)?.lv_embed()?,
                FileKind::Lv => lv_from_json(&text)?,
            };
            write_output(out.as_deref(), &to_canonical_string(&lv_to_json(&lv)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckBec { first, second, out } => {
            let s1 = qp_from_json(&read_input(&first)?)?;
            let s2 = qp_from_json(&read_input(&second)?)?;
            let verdict = check_bec(&s1, &s2)?;
            write_output(out.as_deref(), &to_canonical_string(&bec_to_json(&verdict)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { input, model, time, stage, out } => {
            let csv = simulate(&input, &model, &time.config(), stage)?;
            write_output(out.as_deref(), &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { input, model, time, out } => {
            let loaded = load_model(&read_input(&input)?, &model)?;
            let spec = aux_spec(&model, &loaded.system)?;
            let r = recast(&loaded.system, loaded.shift_ref(), &spec)?;
            let report = verify_recast(&loaded.system, &r, &time.config())?;
            if let Some(t) = report.truncated_at {
                eprintln!("warning: comparison stopped at t = {t}: a trajectory left the positive orthant");
            }
            write_output(out.as_deref(), &to_canonical_string(&report_to_json(&report)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Examples { name, out } => {
            let example = examples::find(&name).ok_or_else(|| {
                Error::Format(FormatError::Schema(format!(
                    "unknown example {name:?}; available: {}",
                    examples::names().join(", ")
                )))
            })?;
            let io_err = |path: &Path| {
                let path = path.display().to_string();
                move |source| Error::Io { path, source }
            };
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            let model_path = out.join(format!("{}.json", example.name));
            let aux_path = out.join(format!("{}.aux.json", example.name));
            fs::write(&model_path, example.model).map_err(io_err(&model_path))?;
            fs::write(&aux_path, example.aux).map_err(io_err(&aux_path))?;
            let written = json!({"model": model_path.display().to_string(), "aux": aux_path.display().to_string()});
            write_output(None, &to_canonical_string(&written))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(ErrorKind::Validation.exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            let kind = err.kind();
            let body = json!({"error": {"kind": kind.as_str(), "message": err.to_string()}});
            eprint!("{}", to_canonical_string(&body));
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}
