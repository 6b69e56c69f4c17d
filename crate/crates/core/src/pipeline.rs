//! Evidence aggregation into torsion verdicts, persistence and reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::nt::is_squarefree_i64;
use crate::curve::{twist, CurveModel};
use crate::error::{Error, Result};
use crate::filters::{congruence_filter, is_els, positive_rank_required, FilterVerdict};
use crate::granville::{growth_series, GrowthSeries};
use crate::lseries::Membership;
use crate::mwsieve::{SieveCertificate, SieveOutcome};
use crate::search::{classify_point, PointClass, RationalPoint, SearchReport};

pub const RANK_X1_13: &str = include_str!("../data/rank_x1_13.txt");
pub const RANK_X1_18: &str = include_str!("../data/rank_x1_18.txt");
pub const UNRESOLVED: &str = include_str!("../data/unresolved.txt");
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The torsion groups possible over quadratic fields: Mazur's fifteen first.
pub const KKM_GROUPS: [&str; 26] = [
    "Z/1", "Z/2", "Z/3", "Z/4", "Z/5", "Z/6", "Z/7", "Z/8", "Z/9", "Z/10", "Z/12",
    "Z/2xZ/2", "Z/2xZ/4", "Z/2xZ/6", "Z/2xZ/8",
    "Z/11", "Z/13", "Z/14", "Z/15", "Z/16", "Z/18", "Z/2xZ/10", "Z/2xZ/12",
    "Z/3xZ/3", "Z/3xZ/6", "Z/4xZ/4",
];

/// Modular curve whose twists decide each non-Mazur group.
pub const CURVE_GROUPS: [(&str, &str); 8] = [
    ("X1_11", "Z/11"),
    ("X1_13", "Z/13"),
    ("X1_14", "Z/14"),
    ("X1_15", "Z/15"),
    ("X1_16", "Z/16"),
    ("X1_18", "Z/18"),
    ("X1_2_10", "Z/2xZ/10"),
    ("X1_2_12", "Z/2xZ/12"),
];

pub fn group_of_curve(label: &str) -> Option<&'static str> {
    CURVE_GROUPS.iter().find(|(l, _)| *l == label).map(|(_, g)| *g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Present,
    Absent,
    /// Sieve certificate conditional on generator saturation.
    AbsentConditional,
    /// Positive analytic rank without algebraic descent.
    PresentHeuristic,
    Undecided,
}

impl Status {
    fn side(self) -> i8 {
        match self {
            Status::Present | Status::PresentHeuristic => 1,
            Status::Absent | Status::AbsentConditional => -1,
            Status::Undecided => 0,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Present => "present",
            Status::Absent => "absent",
            Status::AbsentConditional => "absent_conditional",
            Status::PresentHeuristic => "present_heuristic",
            Status::Undecided => "undecided",
        };
        f.write_str(s)
    }
}

/// Twists with positive analytic rank of the Jacobian, from an external source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankList {
    pub label: String,
    /// Covers |d| < bound.
    pub bound: i64,
    pub values: BTreeSet<i64>,
    pub provenance: String,
}

impl RankList {
    pub fn covers(&self, d: i64) -> bool {
        d.abs() < self.bound
    }
}

/// Parses a list whose header reads `# curve=<label> bound=<B>`.
pub fn ingest_rank_list(label: &str, text: &str) -> Result<RankList> {
    let mut header: BTreeMap<String, String> = BTreeMap::new();
    let mut values = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    header.entry(k.to_string()).or_insert_with(|| v.to_string());
                }
            }
            continue;
        }
        let d: i64 = t.parse().map_err(|_| Error::Parse(format!("line {}: '{t}' is not an integer", i + 1)))?;
        values.insert(d);
    }
    let curve = header.get("curve").ok_or_else(|| Error::Parse("missing curve= header".into()))?;
    if curve != label {
        return Err(Error::Parse(format!("list is for {curve}, expected {label}")));
    }
    let bound: i64 = header
        .get("bound")
        .and_then(|b| b.parse().ok())
        .ok_or_else(|| Error::Parse("missing or malformed bound= header".into()))?;
    let level = CurveModel::by_label(label)?.level;
    for &d in &values {
        if d == 1 || !is_squarefree_i64(d) {
            return Err(Error::NotSquarefree(d.into()));
        }
        if d.abs() >= bound {
            return Err(Error::Invalid(format!("{d} lies outside |d| < {bound}")));
        }
        if matches!(level, 13 | 18) && congruence_filter(level, d).failed() {
            return Err(Error::Integrity(format!("{d} violates the congruence conditions for level {level}")));
        }
    }
    Ok(RankList { label: label.to_string(), bound, values, provenance: "external".into() })
}

/// The bundled positive-rank lists.
pub fn bundled_rank_lists() -> Result<BTreeMap<String, RankList>> {
    let mut out = BTreeMap::new();
    for (l, t) in [("X1_13", RANK_X1_13), ("X1_18", RANK_X1_18)] {
        out.insert(l.to_string(), ingest_rank_list(l, t)?);
    }
    Ok(out)
}

/// (label, d) pairs the published computation left open.
pub fn unresolved() -> Vec<(String, i64)> {
    UNRESOLVED
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            Some((it.next()?.to_string(), it.next()?.parse().ok()?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEvidence {
    pub positive: bool,
    pub provenance: String,
}

/// Summary of a sieve run kept in the record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveRef {
    pub nprime: u64,
    pub primes: Vec<u64>,
    pub generators: usize,
    pub survivor_count: u64,
    pub outcome: SieveOutcome,
}

impl From<&SieveCertificate> for SieveRef {
    fn from(c: &SieveCertificate) -> Self {
        SieveRef {
            nprime: c.nprime,
            primes: c.primes.clone(),
            generators: c.generators.len(),
            survivor_count: c.survivor_count,
            outcome: c.outcome,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub label: String,
    pub level: u32,
    pub genus: u32,
    pub d: i64,
    pub filters: Vec<FilterVerdict>,
    pub rank: Option<RankEvidence>,
    /// Verified noncuspidal points with y ≠ 0.
    pub points: Vec<RationalPoint>,
    /// Genus-1 verdict from the twisted L-value.
    pub membership: Option<Membership>,
    pub sieve: Option<SieveRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    #[serde(flatten)]
    pub evidence: Evidence,
    pub status: Status,
    pub reason: String,
    pub timestamp: u64,
    pub code_version: String,
}

impl ScanRecord {
    pub fn new(evidence: Evidence) -> Result<ScanRecord> {
        let (status, reason) = derive_status(&evidence)?;
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|t| t.as_secs()).unwrap_or(0);
        Ok(ScanRecord { evidence, status, reason, timestamp, code_version: CODE_VERSION.into() })
    }
    pub fn key(&self) -> (String, i64) {
        (self.evidence.label.clone(), self.evidence.d)
    }
}

/// Over Q(i) and Q(√−3) only Mazur's groups and (4,4), resp. (3,3), (3,6) occur.
fn special_field(d: i64) -> bool {
    d == -1 || d == -3
}

/// Status as a pure function of the evidence.
pub fn derive_status(e: &Evidence) -> Result<(Status, String)> {
    if e.d == 1 || !is_squarefree_i64(e.d) {
        return Err(Error::NotSquarefree(e.d.into()));
    }
    if e.genus == 1 {
        if special_field(e.d) {
            return Ok((Status::Absent, "imaginary quadratic field with known torsion".into()));
        }
        return Ok(match e.membership {
            Some(Membership::Present) => (Status::Present, "torsion exception or verified point".into()),
            Some(Membership::PresentHeuristic) => (Status::PresentHeuristic, "positive analytic rank".into()),
            Some(Membership::Absent) => (Status::Absent, "twisted L-value nonzero".into()),
            Some(Membership::Undecided) | None => (Status::Undecided, "L-value inconclusive".into()),
        });
    }
    let mut absent: Option<String> = None;
    if special_field(e.d) {
        absent = Some("imaginary quadratic field with known torsion".into());
    }
    if absent.is_none() {
        if let Some(f) = e.filters.iter().find(|f| f.failed()) {
            absent = Some(f.to_string());
        }
    }
    if absent.is_none() {
        if let Some(r) = &e.rank {
            if !r.positive && positive_rank_required(e.level, e.d).passed() {
                absent = Some(format!("Jacobian rank zero ({})", r.provenance));
            }
        }
    }
    let certified = e
        .sieve
        .as_ref()
        .is_some_and(|s| s.generators > 0 && matches!(s.outcome, SieveOutcome::Empty { .. }));
    if !e.points.is_empty() {
        if let Some(why) = absent {
            return Err(Error::Integrity(format!("{} d={}: point found but {why}", e.label, e.d)));
        }
        if certified {
            return Err(Error::Integrity(format!("{} d={}: point found but sieve certified emptiness", e.label, e.d)));
        }
        return Ok((Status::Present, format!("point x = {}", e.points[0].x())));
    }
    if let Some(why) = absent {
        return Ok((Status::Absent, why));
    }
    if let Some(s) = e.sieve.as_ref().filter(|s| s.generators > 0) {
        if let SieveOutcome::Empty { conditional } = s.outcome {
            let st = if conditional { Status::AbsentConditional } else { Status::Absent };
            return Ok((st, format!("sieve N′ = {} over {} primes", s.nprime, s.primes.len())));
        }
    }
    Ok((Status::Undecided, "no point, no certificate".into()))
}

/// Evidence for a genus-2 twist, evaluating the filters in order and
/// stopping at the first failure.
pub fn genus2_evidence(
    c: &Arc<CurveModel>,
    d: i64,
    search: Option<&SearchReport>,
    ranks: Option<&RankList>,
    sieve: Option<SieveRef>,
) -> Result<Evidence> {
    let t = twist(c, d)?;
    let mut filters = Vec::new();
    let mut failed = false;
    if matches!(c.level, 13 | 18) {
        let v = congruence_filter(c.level, d);
        failed = v.failed();
        filters.push(v);
    }
    if !failed {
        filters.push(is_els(&t)?);
    }
    let rank = ranks
        .filter(|r| r.label == c.label && r.covers(d))
        .map(|r| RankEvidence { positive: r.values.contains(&d), provenance: r.provenance.clone() });
    let mut points = Vec::new();
    if let Some(pts) = search.and_then(|s| s.points.get(&d)) {
        for p in pts {
            if classify_point(c, d, p)? == PointClass::NoncuspidalQuadratic {
                points.push(p.clone());
            }
        }
    }
    Ok(Evidence { label: c.label.clone(), level: c.level, genus: 2, d, filters, rank, points, membership: None, sieve })
}

/// Records for every squarefree d ≠ 0, 1 with |d| < d_bound.
pub fn scan_genus2(
    c: &Arc<CurveModel>,
    d_bound: i64,
    search: &SearchReport,
    ranks: Option<&RankList>,
    sieves: &BTreeMap<i64, SieveRef>,
) -> Result<Vec<ScanRecord>> {
    let ds: Vec<i64> = (-d_bound + 1..d_bound).filter(|&d| d != 0 && d != 1 && is_squarefree_i64(d)).collect();
    ds.par_iter()
        .map(|&d| ScanRecord::new(genus2_evidence(c, d, Some(search), ranks, sieves.get(&d).cloned())?))
        .collect()
}

pub fn genus1_evidence(label: &str, d: i64, membership: Option<Membership>) -> Evidence {
    Evidence {
        label: label.to_string(),
        level: 0,
        genus: 1,
        d,
        filters: Vec::new(),
        rank: None,
        points: Vec::new(),
        membership,
        sieve: None,
    }
}

/// Snapshot derived from the append-only record log.
#[derive(Clone, Debug, Default)]
pub struct EvidenceDb {
    pub records: BTreeMap<(String, i64), ScanRecord>,
}

impl EvidenceDb {
    /// Adds a record; a later record may only resolve an undecided status.
    pub fn insert(&mut self, r: ScanRecord) -> Result<()> {
        let (status, _) = derive_status(&r.evidence)?;
        if status != r.status {
            return Err(Error::Integrity(format!("{:?}: stored status {} but evidence gives {status}", r.key(), r.status)));
        }
        if let Some(old) = self.records.get(&r.key()) {
            if old.status.side() * r.status.side() < 0 || (old.status.side() != 0 && r.status.side() == 0) {
                return Err(Error::Integrity(format!("{:?}: {} cannot become {}", r.key(), old.status, r.status)));
            }
        }
        self.records.insert(r.key(), r);
        Ok(())
    }

    pub fn from_jsonl(text: &str) -> Result<EvidenceDb> {
        let mut db = EvidenceDb::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            db.insert(serde_json::from_str(line)?)?;
        }
        Ok(db)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in self.records.values() {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn status(&self, label: &str, d: i64) -> Option<Status> {
        self.records.get(&(label.to_string(), d)).map(|r| r.status)
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.records.keys().map(|(l, _)| l.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionRow {
    pub d: i64,
    pub statuses: BTreeMap<String, Status>,
}

/// Status of each of the 26 groups over Q(√d).
pub fn classify(d: i64, db: &EvidenceDb) -> Result<TorsionRow> {
    if d == 1 || !is_squarefree_i64(d) {
        return Err(Error::NotSquarefree(d.into()));
    }
    let mut statuses = BTreeMap::new();
    for g in &KKM_GROUPS[..15] {
        statuses.insert(g.to_string(), Status::Present);
    }
    let flag = |b: bool| if b { Status::Present } else { Status::Absent };
    statuses.insert("Z/3xZ/3".into(), flag(d == -3));
    statuses.insert("Z/3xZ/6".into(), flag(d == -3));
    statuses.insert("Z/4xZ/4".into(), flag(d == -1));
    for (label, g) in CURVE_GROUPS {
        let st = match db.records.get(&(label.to_string(), d)) {
            Some(r) => {
                let (st, _) = derive_status(&r.evidence)?;
                if st != r.status {
                    return Err(Error::Integrity(format!("{label} d={d}: stale status")));
                }
                st
            }
            None if special_field(d) => Status::Absent,
            None => Status::Undecided,
        };
        statuses.insert(g.to_string(), st);
    }
    Ok(TorsionRow { d, statuses })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthRow {
    pub label: String,
    pub b: u64,
    pub count: usize,
    pub ratio: f64,
    pub kappa_prediction: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Report {
    pub bound: i64,
    /// Non-absent twists per curve with their status.
    pub t_sets: BTreeMap<String, Vec<(i64, Status)>>,
    pub growth: Vec<GrowthRow>,
    pub undecided: BTreeMap<String, Vec<i64>>,
    pub warnings: Vec<String>,
}

/// T sets, growth series and the undecided list for |d| < bound.
pub fn report(db: &EvidenceDb, bound: i64, kappas: &BTreeMap<String, f64>, step: u64) -> Report {
    let mut r = Report { bound, ..Default::default() };
    if db.records.is_empty() {
        r.warnings.push("empty evidence database".into());
        return r;
    }
    for label in db.labels() {
        let rows: Vec<(i64, Status)> = db
            .records
            .range((label.clone(), i64::MIN)..=(label.clone(), i64::MAX))
            .map(|(_, rec)| (rec.evidence.d, rec.status))
            .filter(|&(d, s)| d.abs() < bound && s != Status::Absent)
            .collect();
        let present: Vec<i64> =
            rows.iter().filter(|(_, s)| matches!(s, Status::Present | Status::PresentHeuristic)).map(|&(d, _)| d).collect();
        let undecided: Vec<i64> = rows.iter().filter(|(_, s)| *s == Status::Undecided).map(|&(d, _)| d).collect();
        let series: GrowthSeries = growth_series(&label, &present, bound as u64, step);
        let k = kappas.get(&label).copied();
        if k.is_none() {
            r.warnings.push(format!("no κ′ for {label}"));
        }
        for s in &series.samples {
            r.growth.push(GrowthRow {
                label: label.clone(),
                b: s.b,
                count: s.count,
                ratio: s.ratio,
                kappa_prediction: k.map_or(f64::NAN, |k| k * (s.b as f64).cbrt()),
            });
        }
        r.t_sets.insert(label.clone(), rows);
        r.undecided.insert(label, undecided);
    }
    let labels = db.labels();
    for (label, d) in unresolved() {
        if d.abs() >= bound || !labels.contains(&label) {
            continue;
        }
        match db.status(&label, d) {
            Some(Status::Undecided) => {}
            Some(s) => r.warnings.push(format!("{label} d={d} is {s}; the published computation left it open")),
            None => r.warnings.push(format!("{label} d={d} has no record")),
        }
    }
    r
}

impl Report {
    pub fn growth_csv(&self) -> String {
        let mut out = String::from("label,B,count,ratio,kappa_prediction\n");
        for g in &self.growth {
            out.push_str(&format!("{},{},{},{:.6},{:.6}\n", g.label, g.b, g.count, g.ratio, g.kappa_prediction));
        }
        out
    }

    pub fn undecided_text(&self) -> String {
        let mut out = String::new();
        for (label, ds) in &self.undecided {
            for d in ds {
                out.push_str(&format!("{label} {d}\n"));
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!("twists with |d| < {}\n", self.bound);
        for (label, rows) in &self.t_sets {
            let present: Vec<String> = rows
                .iter()
                .filter(|(_, s)| matches!(s, Status::Present | Status::PresentHeuristic))
                .map(|(d, _)| d.to_string())
                .collect();
            out.push_str(&format!("{label}: {} present [{}]\n", present.len(), present.join(", ")));
            for (d, s) in rows.iter().filter(|(_, s)| !matches!(s, Status::Present | Status::PresentHeuristic)) {
                out.push_str(&format!("  {d}: {s}\n"));
            }
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::scan_twists;
    use std::sync::OnceLock;

    fn x13_search() -> &'static SearchReport {
        static S: OnceLock<SearchReport> = OnceLock::new();
        S.get_or_init(|| scan_twists(&CurveModel::x1_13(), 60, 2000).unwrap())
    }

    fn record(label: &str, d: i64) -> ScanRecord {
        let c = CurveModel::by_label(label).unwrap();
        let ranks = bundled_rank_lists().unwrap();
        ScanRecord::new(genus2_evidence(&c, d, Some(x13_search()), ranks.get(label), None).unwrap()).unwrap()
    }

    #[test]
    fn classify_examples() {
        let mut db = EvidenceDb::default();
        for d in [17, 5, -3, 673] {
            db.insert(record("X1_13", d)).unwrap();
        }
        assert_eq!(classify(17, &db).unwrap().statuses["Z/13"], Status::Present);
        assert_eq!(classify(5, &db).unwrap().statuses["Z/13"], Status::Absent);
        assert_eq!(classify(673, &db).unwrap().statuses["Z/13"], Status::Undecided);
        let row = classify(-3, &db).unwrap();
        assert_eq!(row.statuses["Z/3xZ/3"], Status::Present);
        assert_eq!(row.statuses["Z/3xZ/6"], Status::Present);
        for g in ["Z/13", "Z/16", "Z/18"] {
            assert_eq!(row.statuses[g], Status::Absent);
        }
        assert_eq!(classify(-1, &db).unwrap().statuses["Z/4xZ/4"], Status::Present);
        assert_eq!(row.statuses.len(), 26);
        assert!(classify(12, &db).is_err());
    }

    #[test]
    fn rank_list_excludes() {
        // 41 passes the congruence and local conditions but has rank zero
        let r = record("X1_13", 41);
        assert_eq!(r.status, Status::Absent);
        assert!(r.reason.contains("rank"), "{}", r.reason);
    }

    #[test]
    fn ingest_validation() {
        assert_eq!(bundled_rank_lists().unwrap()["X1_13"].values.len(), 22);
        assert!(ingest_rank_list("X1_16", "# curve=X1_16 bound=100\n12\n").is_err());
        assert!(ingest_rank_list("X1_13", "# curve=X1_13 bound=100\n5\n").is_err());
        assert!(ingest_rank_list("X1_13", "# curve=X1_13 bound=100\n17\nfoo\n").is_err());
        assert!(ingest_rank_list("X1_13", "# curve=X1_13 bound=100\n113\n").is_err());
        assert!(ingest_rank_list("X1_13", "17\n").is_err());
        let l = ingest_rank_list("X1_16", "# curve=X1_16 bound=100\n-15\n15\n").unwrap();
        assert_eq!(l.provenance, "external");
    }

    #[test]
    fn conflicting_evidence_is_an_error() {
        let mut e = record("X1_13", 17).evidence;
        e.sieve = Some(SieveRef {
            nprime: 19,
            primes: vec![5],
            generators: 1,
            survivor_count: 0,
            outcome: SieveOutcome::Empty { conditional: true },
        });
        assert!(matches!(derive_status(&e), Err(Error::Integrity(_))));
        let mut e = record("X1_13", 17).evidence;
        e.rank = Some(RankEvidence { positive: false, provenance: "test".into() });
        assert!(matches!(derive_status(&e), Err(Error::Integrity(_))));
    }

    #[test]
    fn sieve_certificate_gives_conditional_absence() {
        let mut e = record("X1_13", 673).evidence;
        e.sieve = Some(SieveRef {
            nprime: 19,
            primes: vec![5, 7],
            generators: 1,
            survivor_count: 0,
            outcome: SieveOutcome::Empty { conditional: true },
        });
        assert_eq!(derive_status(&e).unwrap().0, Status::AbsentConditional);
    }

    #[test]
    fn sieve_without_generators_is_ignored() {
        let mut e = record("X1_13", 673).evidence;
        e.sieve = Some(SieveRef {
            nprime: 57,
            primes: vec![5, 7],
            generators: 0,
            survivor_count: 0,
            outcome: SieveOutcome::Empty { conditional: true },
        });
        assert_eq!(derive_status(&e).unwrap().0, Status::Undecided);
    }

    #[test]
    fn monotone_updates() {
        let mut db = EvidenceDb::default();
        let undecided = record("X1_13", 673);
        db.insert(undecided.clone()).unwrap();
        let mut e = undecided.evidence.clone();
        e.sieve = Some(SieveRef {
            nprime: 19,
            primes: vec![5],
            generators: 1,
            survivor_count: 0,
            outcome: SieveOutcome::Empty { conditional: true },
        });
        let resolved = ScanRecord::new(e).unwrap();
        db.insert(resolved).unwrap();
        assert!(db.insert(undecided).is_err());
    }

    #[test]
    fn round_trip_is_deterministic() {
        let mut db = EvidenceDb::default();
        for d in [17, 5, 41, 673, -7] {
            db.insert(record("X1_13", d)).unwrap();
        }
        let text = db.to_jsonl().unwrap();
        let back = EvidenceDb::from_jsonl(&text).unwrap();
        assert_eq!(back.to_jsonl().unwrap(), text);
        for d in [17, 5, 41, 673, -7] {
            assert_eq!(classify(d, &back).unwrap(), classify(d, &db).unwrap());
        }
    }

    #[test]
    fn empty_report_warns() {
        let r = report(&EvidenceDb::default(), 1000, &BTreeMap::new(), 100);
        assert!(r.t_sets.is_empty() && !r.warnings.is_empty());
        assert_eq!(r.growth_csv(), "label,B,count,ratio,kappa_prediction\n");
    }

    #[test]
    fn report_lists_undecided() {
        let c = CurveModel::x1_13();
        let ranks = bundled_rank_lists().unwrap();
        let recs = scan_genus2(&c, 2000, x13_search(), ranks.get("X1_13"), &BTreeMap::new()).unwrap();
        let mut db = EvidenceDb::default();
        for r in recs {
            db.insert(r).unwrap();
        }
        let rep = report(&db, 2000, &BTreeMap::from([("X1_13".to_string(), 1.65)]), 500);
        let present: Vec<i64> =
            rep.t_sets["X1_13"].iter().filter(|(_, s)| *s == Status::Present).map(|&(d, _)| d).collect();
        assert_eq!(present, vec![17, 113, 193, 313, 481, 1153, 1417]);
        assert_eq!(rep.undecided["X1_13"], vec![673, 1609, 1921]);
        assert_eq!(rep.growth.len(), 4);
        assert!(rep.growth_csv().lines().nth(1).unwrap().starts_with("X1_13,500,"));
    }

    #[test]
    fn unresolved_list_shape() {
        let u = unresolved();
        assert_eq!(u.iter().filter(|(l, _)| l == "X1_16").count(), 38);
        assert_eq!(u.len(), 42);
    }
}
