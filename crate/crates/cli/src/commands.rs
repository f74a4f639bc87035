use std::fs;
use std::path::{Path, PathBuf};

use mbasis::basis::{CompletionCaps, ToricOptions};
use mbasis::fiber::{enumerate_fiber_cells, walk};
use mbasis::formats::{parse_basis, parse_edge_list, parse_matrix, parse_table_csv, write_basis};
use mbasis::gof::{exact_pvalue_mc, McOptions};
use mbasis::model::{sufficient_statistics, Family};
use mbasis::{
    generic_design, graph_to_table, independence_basis, independence_design, p1_design, toric_markov_basis_with,
    GofTest, MarkovBasis, ModelSpec, ProposalKind, Reciprocity, Table, Target, WalkConfig,
};

use crate::error::{CliError, CliResult};
use crate::options::{Manifest, ModelKind, Options, ProposalArg, ReciprocityArg, TargetArg};
use crate::report;

pub const MANIFEST_FILE: &str = "manifest.json";

/// What a command printed, for the caller to show.
pub type Summary = String;

pub fn execute(command: &str, opts: &Options, out: &Path) -> CliResult<Summary> {
    let summary = match command {
        "basis" => cmd_basis(opts, out)?,
        "test" => cmd_test(opts, out)?,
        "enumerate" => cmd_enumerate(opts, out)?,
        "sample" => cmd_sample(opts, out)?,
        other => return Err(CliError::usage(format!("unknown command {other:?} in manifest"))),
    };
    let manifest = Manifest::new(command, opts.clone());
    write(&out.join(MANIFEST_FILE), &report::to_json(&manifest))?;
    Ok(summary)
}

/// Replays a manifest file.
pub fn replay(manifest: &Path, out: Option<&Path>) -> CliResult<Summary> {
    let text = read(manifest)?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::InputParse {
        path: manifest.to_path_buf(),
        message: e.to_string(),
    })?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => manifest.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    execute(&m.command, &m.options, &dir)
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Attaches the file name to core parse errors.
fn parsed<T>(path: &Path, r: mbasis::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        mbasis::Error::Parse { line, message } => CliError::Core(mbasis::Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        }),
        other => CliError::Core(other),
    })
}

fn reciprocity(r: Option<ReciprocityArg>) -> Reciprocity {
    match r.unwrap_or(ReciprocityArg::Constant) {
        ReciprocityArg::Zero => Reciprocity::Zero,
        ReciprocityArg::Constant => Reciprocity::Constant,
        ReciprocityArg::Differential => Reciprocity::Differential,
    }
}

/// Reads the data file (if any) and builds the model around it.
fn load(opts: &Options) -> CliResult<(ModelSpec, Option<Table>)> {
    let data = opts.data.as_ref().map(|p| read(p).map(|t| (p, t))).transpose()?;
    match opts.model {
        ModelKind::Independence => {
            let rows = match &data {
                Some((p, text)) => Some(parsed(p, parse_table_csv(text))?),
                None => None,
            };
            let dims = match (&opts.dims, &rows) {
                (Some(d), _) => d.clone(),
                (None, Some(r)) => vec![r.len(), r[0].len()],
                (None, None) => return Err(CliError::usage("independence models need --dims or --data")),
            };
            if dims.len() != 2 {
                return Err(CliError::usage("--dims takes two sizes, e.g. 3,3"));
            }
            if let Some(r) = &rows {
                if r.len() != dims[0] || r[0].len() != dims[1] {
                    return Err(CliError::usage(format!(
                        "data is {}x{} but --dims is {}x{}",
                        r.len(),
                        r[0].len(),
                        dims[0],
                        dims[1]
                    )));
                }
            }
            let spec = independence_design(dims[0], dims[1])?;
            let table = rows.map(|r| Table::from_rows(&r)).transpose()?;
            Ok((spec, table))
        }
        ModelKind::P1 => {
            let n = opts.nodes.ok_or_else(|| CliError::usage("p1 models need --nodes"))?;
            let spec = p1_design(n, reciprocity(opts.reciprocity))?;
            let table = match &data {
                Some((p, text)) => Some(graph_to_table(&parsed(p, parse_edge_list(text, n))?)),
                None => None,
            };
            Ok((spec, table))
        }
        ModelKind::Generic => {
            let path = opts
                .matrix
                .as_ref()
                .ok_or_else(|| CliError::usage("generic models need --matrix"))?;
            let a = parsed(path, parse_matrix(&read(path)?))?;
            let spec = generic_design(a, None)?;
            let table = match &data {
                Some((p, text)) => {
                    let cells: Vec<i64> = parsed(p, parse_table_csv(text))?.concat();
                    Some(spec.table(cells)?)
                }
                None => None,
            };
            Ok((spec, table))
        }
    }
}

fn basis_for(spec: &ModelSpec, opts: &Options) -> CliResult<MarkovBasis> {
    if let Some(path) = &opts.basis {
        let vectors = parsed(path, parse_basis(&read(path)?))?;
        return Ok(MarkovBasis::from_vectors(spec.design().clone(), vectors)?);
    }
    if let Family::Independence { rows, cols } = *spec.family() {
        return Ok(independence_basis(rows, cols)?);
    }
    let toric = ToricOptions {
        caps: CompletionCaps {
            max_binomials: opts.max_binomials,
            max_degree: opts.max_degree,
            ..CompletionCaps::default()
        },
        ..ToricOptions::default()
    };
    Ok(toric_markov_basis_with(spec.design(), toric)?)
}

fn walk_config(opts: &Options) -> CliResult<WalkConfig> {
    let cfg = WalkConfig {
        steps: opts.steps,
        burn_in: opts.burnin,
        thin: opts.thin,
        seed: opts.seed.ok_or_else(|| CliError::usage("--seed is required"))?,
        target: match opts.target {
            TargetArg::Uniform => Target::Uniform,
            TargetArg::Hypergeometric => Target::Hypergeometric,
        },
        proposal: match opts.proposal {
            ProposalArg::Basis => ProposalKind::Basis,
            ProposalArg::Dynamic => ProposalKind::DynamicP1,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn require_table(table: Option<Table>) -> CliResult<Table> {
    table.ok_or_else(|| CliError::usage("--data is required"))
}

fn walk_basis(spec: &ModelSpec, opts: &Options) -> CliResult<Option<MarkovBasis>> {
    match opts.proposal {
        ProposalArg::Basis => Ok(Some(basis_for(spec, opts)?)),
        ProposalArg::Dynamic => Ok(None),
    }
}

fn cmd_basis(opts: &Options, out: &Path) -> CliResult<Summary> {
    let (spec, _) = load(opts)?;
    let basis = basis_for(&spec, opts)?;
    write(&out.join("basis.txt"), &write_basis(&basis))?;
    Ok(format!("moves: {}\nmax degree: {}", basis.len(), basis.max_degree()))
}

fn cmd_test(opts: &Options, out: &Path) -> CliResult<Summary> {
    let (spec, table) = load(opts)?;
    let u = require_table(table)?;
    let cfg = walk_config(opts)?;
    let basis = walk_basis(&spec, opts)?;
    let mc = McOptions {
        chains: opts.chains,
        bins: opts.bins,
    };
    let result: GofTest = exact_pvalue_mc(&spec, &u, basis.as_ref(), &cfg, mc)?;
    write(
        &out.join("result.json"),
        &report::to_json(&report::TestDocument::new(&result)),
    )?;
    write(&out.join("histogram.csv"), &report::histogram_csv(&result.histogram))?;
    write(
        &out.join("histogram.svg"),
        &report::histogram_svg(&result.histogram, result.observed_stat),
    )?;
    Ok(format!(
        "chi-square: {}\np-value: {} (se {})\nsamples: {}",
        result.observed_stat, result.p_value, result.mc_std_error, result.sample_size
    ))
}

fn statistics_header(stats: &[i64]) -> String {
    let joined: Vec<String> = stats.iter().map(i64::to_string).collect();
    format!("# statistics {}\n", joined.join(" "))
}

fn table_line(cells: &[i64]) -> String {
    let joined: Vec<String> = cells.iter().map(i64::to_string).collect();
    joined.join(" ") + "\n"
}

fn cmd_enumerate(opts: &Options, out: &Path) -> CliResult<Summary> {
    let (spec, table) = load(opts)?;
    let u = require_table(table)?;
    let fiber = enumerate_fiber_cells(spec.design(), u.cells(), opts.cap)?;
    let mut text = statistics_header(&sufficient_statistics(&spec, &u)?);
    fiber.iter().for_each(|v| text.push_str(&table_line(v)));
    write(&out.join("fiber.txt"), &text)?;
    Ok(format!("fiber size: {}", fiber.len()))
}

fn cmd_sample(opts: &Options, out: &Path) -> CliResult<Summary> {
    let (spec, table) = load(opts)?;
    let u = require_table(table)?;
    let cfg = walk_config(opts)?;
    let basis = walk_basis(&spec, opts)?;
    let sample = walk(&spec, basis.as_ref(), &u, &cfg)?;
    let mut text = statistics_header(&sufficient_statistics(&spec, &u)?);
    sample.states.iter().for_each(|v| text.push_str(&table_line(v)));
    write(&out.join("samples.txt"), &text)?;
    Ok(format!(
        "recorded: {}\naccepted: {} of {}",
        sample.states.len(),
        sample.acceptance_count,
        sample.proposal_count
    ))
}
