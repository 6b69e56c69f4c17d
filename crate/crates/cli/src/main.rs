use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Deserialize;

use qtors_core::arith::nt::is_prime_u64;
use qtors_core::curve::{fixtures, twist, CurveModel};
use qtors_core::filters::{congruence_filter, is_els, quadratic_torsion_bound};
use qtors_core::granville::{self, kappa};
use qtors_core::jacobian::global::find_degree3_divisor;
use qtors_core::lseries::{genus1_membership, EllipticCurve, LSeries, VerdictConfig};
use qtors_core::mwsieve::{self, SieveInput, SieveOptions};
use qtors_core::pipeline::{
    self, bundled_rank_lists, classify, genus1_evidence, ingest_rank_list, scan_genus2, EvidenceDb, RankList, ScanRecord,
    SieveRef,
};
use qtors_core::search::{classify_point, scan_twists};

#[derive(Parser)]
#[command(name = "qtors", version, about = "Torsion of elliptic curves over quadratic fields")]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full pipeline over |d| < dmax; appends records to <out>/records.jsonl.
    Scan {
        #[arg(long, default_value = "all")]
        curve: String,
        #[arg(long)]
        dmax: Option<i64>,
        #[arg(long)]
        height: Option<i64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Also decide the five genus-1 groups from twisted L-values.
        #[arg(long)]
        genus_one: bool,
    },
    /// Status of all 26 groups over Q(√d).
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        #[arg(long, default_value = "results/records.jsonl")]
        db: PathBuf,
    },
    /// Rational points on all twists; one CSV line per point.
    Search {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 2000)]
        height: i64,
        #[arg(long, default_value_t = 10_000)]
        dmax: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Twisted L-value of a genus-1 curve at s = 1.
    Lvalue {
        #[arg(long)]
        curve: String,
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        #[arg(long)]
        terms: Option<usize>,
    },
    /// Mordell–Weil sieve on one twist.
    Sieve {
        #[arg(long)]
        curve: String,
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        #[arg(long)]
        nprime: Option<u64>,
        /// One JSON divisor class per line.
        #[arg(long)]
        generators: Option<PathBuf>,
        /// Comma-separated primes, or auto[:count].
        #[arg(long, default_value = "auto")]
        primes: String,
        #[arg(long)]
        saturated: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Congruence and local-solubility verdicts.
    Localtest {
        #[arg(long)]
        curve: String,
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
    },
    /// Bound on the torsion of J over any quadratic field.
    Torsionbound {
        #[arg(long)]
        curve: String,
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        k: u8,
    },
    /// Granville's constant κ′.
    Kappa {
        #[arg(long, default_value = "all")]
        curve: String,
        #[arg(long, default_value_t = granville::DEFAULT_PRIME_CUTOFF)]
        cutoff: u64,
        #[arg(long, default_value_t = granville::DEFAULT_DEPTH)]
        depth: u32,
    },
    /// T sets, growth CSV and undecided list from the record log.
    Report {
        #[arg(long, default_value = "results/records.jsonl")]
        db: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        bound: i64,
        #[arg(long, default_value_t = 100)]
        step: u64,
        #[arg(long, default_value_t = granville::DEFAULT_PRIME_CUTOFF)]
        cutoff: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    #[serde(default)]
    scan: ScanSection,
    #[serde(default)]
    rank_list: Vec<RankListEntry>,
    #[serde(default)]
    sieve: Vec<SieveEntry>,
    #[serde(default)]
    lseries: LSeriesSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanSection {
    #[serde(default = "default_height")]
    height: i64,
    #[serde(default = "default_dmax")]
    dmax: i64,
    #[serde(default = "default_base_height")]
    base_height: i64,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection { height: default_height(), dmax: default_dmax(), base_height: default_base_height() }
    }
}

fn default_height() -> i64 {
    2000
}
fn default_dmax() -> i64 {
    10_000
}
fn default_base_height() -> i64 {
    8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RankListEntry {
    label: String,
    path: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SieveEntry {
    label: String,
    d: i64,
    nprime: Option<u64>,
    generators: PathBuf,
    #[serde(default)]
    primes: Vec<u64>,
    #[serde(default)]
    saturation_claimed: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LSeriesSection {
    #[serde(default)]
    verdict: Option<VerdictConfig>,
}

impl Default for LSeriesSection {
    fn default() -> Self {
        LSeriesSection { verdict: None }
    }
}

fn load_config(path: Option<&Path>) -> Result<(Config, PathBuf)> {
    match path {
        None => Ok((Config::default(), PathBuf::from("."))),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cfg: Config = toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            Ok((cfg, p.parent().map(Path::to_path_buf).unwrap_or_default()))
        }
    }
}

fn rank_lists(cfg: &Config, root: &Path) -> Result<BTreeMap<String, RankList>> {
    let mut out = bundled_rank_lists()?;
    for e in &cfg.rank_list {
        let text = fs::read_to_string(root.join(&e.path)).with_context(|| format!("reading {}", e.path.display()))?;
        out.insert(e.label.clone(), ingest_rank_list(&e.label, &text)?);
    }
    Ok(out)
}

fn genus2_labels(curve: &str) -> Result<Vec<String>> {
    let all: Vec<String> = fixtures().hyperelliptic.iter().map(|c| c.label.clone()).collect();
    if curve == "all" {
        return Ok(all);
    }
    if all.iter().any(|l| l == curve) {
        Ok(vec![curve.to_string()])
    } else if fixtures().elliptic.iter().any(|e| e.label == curve) {
        Ok(Vec::new())
    } else {
        bail!("unknown curve {curve}")
    }
}

fn genus1_labels(curve: &str) -> Vec<String> {
    fixtures().elliptic.iter().map(|e| e.label.clone()).filter(|l| curve == "all" || l == curve).collect()
}

fn append_records(path: &Path, recs: &[ScanRecord]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    for r in recs {
        writeln!(f, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

/// Later lines supersede earlier ones for the same twist.
fn load_db(path: &Path) -> Result<EvidenceDb> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    EvidenceDb::from_jsonl(&text).map_err(Into::into)
}

fn parse_primes(spec: &str, inp: &SieveInput) -> Result<Vec<u64>> {
    if let Some(rest) = spec.strip_prefix("auto") {
        let cap = match rest.strip_prefix(':') {
            Some(n) => n.parse()?,
            None => mwsieve::DEFAULT_PRIME_CAP,
        };
        return Ok(mwsieve::select_primes(&inp.curve, &inp.base, &inp.generators, inp.nprime, mwsieve::DEFAULT_PRIME_LIMIT, cap)?);
    }
    spec.split(',').map(|s| s.trim().parse::<u64>().map_err(|e| anyhow!("bad prime '{s}': {e}"))).collect()
}

#[allow(clippy::too_many_arguments)]
fn run_sieve_cmd(
    label: &str,
    d: i64,
    nprime: Option<u64>,
    generators: Option<&Path>,
    primes: &str,
    saturated: bool,
    base_height: i64,
) -> Result<mwsieve::SieveCertificate> {
    let c = twist(&CurveModel::by_label(label)?, d)?;
    let base = find_degree3_divisor(&c, base_height)?.ok_or_else(|| anyhow!("no degree-3 divisor up to height {base_height}"))?;
    let gens = match generators {
        Some(p) => mwsieve::parse_generators(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => Vec::new(),
    };
    let mut inp = SieveInput { curve: c, base, generators: gens, nprime: nprime.unwrap_or(2), primes: Vec::new(), saturation_claimed: saturated };
    if nprime.is_none() {
        let seed: Vec<u64> = (3..200).filter(|&p| is_prime_u64(p) && mwsieve::admissible(&inp.curve, &inp.base, &inp.generators, p)).collect();
        inp.nprime = mwsieve::suggest_nprime(&inp.curve, &seed)?;
    }
    inp.primes = parse_primes(primes, &inp)?;
    Ok(mwsieve::run_sieve(&inp, &SieveOptions::default())?)
}

fn kappas(cutoff: u64, depth: u32) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for c in &fixtures().hyperelliptic {
        let k = kappa(&c.label, &c.f, c.automorphism_factor, cutoff, depth)?;
        out.insert(c.label.clone(), k.kappa);
    }
    Ok(out)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (cfg, root) = load_config(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Scan { curve, dmax, height, out, genus_one } => {
            let dmax = dmax.unwrap_or(cfg.scan.dmax);
            let height = height.unwrap_or(cfg.scan.height);
            let ranks = rank_lists(&cfg, &root)?;
            let log = out.join("records.jsonl");
            for label in genus2_labels(&curve)? {
                let c = CurveModel::by_label(&label)?;
                eprintln!("{label}: searching H = {height}, |d| < {dmax}");
                let search = scan_twists(&c, height, dmax)?;
                let mut sieves = BTreeMap::new();
                for s in cfg.sieve.iter().filter(|s| s.label == label && s.d.abs() < dmax) {
                    let primes = if s.primes.is_empty() {
                        "auto".to_string()
                    } else {
                        s.primes.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
                    };
                    let gens = root.join(&s.generators);
                    let cert = run_sieve_cmd(&label, s.d, s.nprime, Some(&gens), &primes, s.saturation_claimed, cfg.scan.base_height)?;
                    eprintln!("{label} d={}: sieve {:?}", s.d, cert.outcome);
                    sieves.insert(s.d, SieveRef::from(&cert));
                }
                let recs = scan_genus2(&c, dmax, &search, ranks.get(&label), &sieves)?;
                append_records(&log, &recs)?;
                eprintln!("{label}: {} records", recs.len());
            }
            if genus_one {
                let vc = cfg.lseries.verdict.unwrap_or_default();
                for label in genus1_labels(&curve) {
                    let e = EllipticCurve::by_label(&label)?;
                    let worst = e.conductor * 16 * (dmax as u64).pow(2);
                    let ls = LSeries::new(e, LSeries::default_terms(worst) as u64)?;
                    let ds: Vec<i64> = (-dmax + 1..dmax)
                        .filter(|&d| d != 0 && d != 1 && qtors_core::arith::nt::is_squarefree_i64(d))
                        .collect();
                    let recs: Vec<ScanRecord> = ds
                        .iter()
                        .map(|&d| {
                            let m = genus1_membership(&ls, d, &vc).ok();
                            ScanRecord::new(genus1_evidence(&label, d, m))
                        })
                        .collect::<qtors_core::Result<_>>()?;
                    append_records(&log, &recs)?;
                    eprintln!("{label}: {} records", recs.len());
                }
            }
        }
        Cmd::Classify { d, db } => {
            let db = load_db(&db)?;
            let row = classify(d, &db)?;
            for g in pipeline::KKM_GROUPS {
                println!("{g:10} {}", row.statuses[g]);
            }
        }
        Cmd::Search { curve, height, dmax, out } => {
            let c = CurveModel::by_label(&curve)?;
            let rep = scan_twists(&c, height, dmax)?;
            let mut text = String::from("curve,d,r,s,y_num,y_den,class\n");
            for (&d, pts) in &rep.points {
                for p in pts {
                    let cls = serde_json::to_value(classify_point(&c, d, p)?)?;
                    text.push_str(&format!(
                        "{},{d},{},{},{},{},{}\n",
                        c.label,
                        p.r,
                        p.s,
                        p.y.numer(),
                        p.y.denom(),
                        cls.as_str().unwrap_or_default()
                    ));
                }
            }
            match out {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
        Cmd::Lvalue { curve, d, terms } => {
            let e = EllipticCurve::by_label(&curve)?;
            let ls = LSeries::new(e, 20_000)?;
            let td = ls.twist_data(d)?;
            let need = terms.unwrap_or_else(|| LSeries::default_terms(td.conductor));
            let ls = LSeries::new(ls.curve, need as u64)?;
            let l = ls.twisted_l_value(d, terms)?;
            let v = ls.verdict(d, &cfg.lseries.verdict.unwrap_or_default())?;
            println!("{}", serde_json::to_string_pretty(&serde_json::json!({ "l_value": l, "analytic_rank": v.verdict }))?);
        }
        Cmd::Sieve { curve, d, nprime, generators, primes, saturated, out } => {
            let cert = run_sieve_cmd(&curve, d, nprime, generators.as_deref(), &primes, saturated, cfg.scan.base_height)?;
            let text = serde_json::to_string(&cert)?;
            match out {
                Some(p) => fs::write(p, text + "\n")?,
                None => println!("{text}"),
            }
            eprintln!("N′ = {}, |S| = {}, survivors = {}, outcome {:?}", cert.nprime, cert.primes.len(), cert.survivor_count, cert.outcome);
        }
        Cmd::Localtest { curve, d } => {
            let c = CurveModel::by_label(&curve)?;
            if matches!(c.level, 13 | 18) {
                println!("{}", congruence_filter(c.level, d));
            }
            println!("{}", is_els(&twist(&c, d)?)?);
        }
        Cmd::Torsionbound { curve, primes, k } => {
            let c = CurveModel::by_label(&curve)?;
            println!("{}", quadratic_torsion_bound(&c, &primes, k)?);
        }
        Cmd::Kappa { curve, cutoff, depth } => {
            for c in fixtures().hyperelliptic.iter().filter(|c| curve == "all" || c.label == curve) {
                let k = kappa(&c.label, &c.f, c.automorphism_factor, cutoff, depth)?;
                println!(
                    "{} area = {:.6} ± {:.1e}  A_f = {}  euler = {:.6}  κ′ = {:.4}",
                    k.label, k.area.value, k.area.error, k.automorphism_factor, k.euler.value, k.kappa
                );
            }
        }
        Cmd::Report { db, bound, step, cutoff, out } => {
            let db = load_db(&db)?;
            let rep = pipeline::report(&db, bound, &kappas(cutoff, granville::DEFAULT_DEPTH)?, step);
            fs::create_dir_all(&out)?;
            fs::write(out.join("growth.csv"), rep.growth_csv())?;
            fs::write(out.join("undecided.txt"), rep.undecided_text())?;
            fs::write(out.join("snapshot.jsonl"), db.to_jsonl()?)?;
            let summary = rep.summary();
            fs::write(out.join("summary.txt"), &summary)?;
            print!("{summary}");
        }
    }
    Ok(())
}
