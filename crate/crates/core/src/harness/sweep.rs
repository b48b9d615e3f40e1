//! Parallel descent sweeps over twist classes with append-only persistence.

use std::collections::BTreeMap;
use std::io::{BufRead, Write as IoWrite};
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::arith::SquareClass;
use crate::curves::{classify_case, CaseLabel, CurveModel};
use crate::descent::{
    case_v_rank_identity_check, descend_edge, localization_image, two_selmer, two_torsion_halved,
};
use crate::randmodel::RankDistribution;
use crate::Result;

use super::sieve::TwistClassSpec;

/// Sweep configuration. `threads <= 1` runs sequentially even when the
/// parallel feature is enabled.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub height: i64,
    pub threads: usize,
    /// Append-only JSONL store enabling resume and incremental extension.
    pub store: Option<PathBuf>,
    /// Carry Selmer bases in the records (needed for moment estimation).
    pub with_bases: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            height: 1000,
            threads: 1,
            store: None,
            with_bases: false,
        }
    }
}

/// One twist's descent summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistRecord {
    pub d: i64,
    pub case: String,
    pub dim_sel_phi1: Option<usize>,
    pub dim_sel_phi1_dual: Option<usize>,
    pub dim_sel_phi2: Option<usize>,
    pub dim_sel_phi2_dual: Option<usize>,
    pub dim_sel2: Option<usize>,
    /// Tamagawa exponents in the orientation that makes `u0 = -u1 - u2`
    /// the localization dimension: `u_i` is the exponent of the dual of
    /// balanced edge i.
    pub u1: Option<i64>,
    pub u2: Option<i64>,
    pub u0: Option<i64>,
    pub defect: Option<i64>,
    pub loc_image_dim: Option<usize>,
    pub flags: Vec<String>,
    pub violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sel_phi1_dual_basis: Option<Vec<SquareClass>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sel2_basis: Option<Vec<Vec<SquareClass>>>,
}

impl TwistRecord {
    fn empty(d: i64, case: &str) -> Self {
        TwistRecord {
            d,
            case: case.to_string(),
            dim_sel_phi1: None,
            dim_sel_phi1_dual: None,
            dim_sel_phi2: None,
            dim_sel_phi2_dual: None,
            dim_sel2: None,
            u1: None,
            u2: None,
            u0: None,
            defect: None,
            loc_image_dim: None,
            flags: Vec::new(),
            violations: Vec::new(),
            sel_phi1_dual_basis: None,
            sel2_basis: None,
        }
    }

    /// The descent rank paired with the model laws: `dim Sel(dual edge) - 1`.
    pub fn r_phi(&self) -> Option<i64> {
        self.dim_sel_phi1_dual.map(|d| d as i64 - 1)
    }

    pub fn r2(&self) -> Option<i64> {
        self.dim_sel2.map(|d| d as i64 - 2)
    }

    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn csv_row(&self) -> String {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or(String::new(), |x| x.to_string())
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.d,
            self.case,
            opt(&self.dim_sel_phi1),
            opt(&self.dim_sel_phi1_dual),
            opt(&self.dim_sel_phi2),
            opt(&self.dim_sel_phi2_dual),
            opt(&self.dim_sel2),
            opt(&self.u1),
            opt(&self.u2),
            opt(&self.u0),
            opt(&self.defect),
            opt(&self.loc_image_dim),
            self.flags.join(";"),
        )
    }
}

pub const CSV_HEADER: &str = "d,case,dim_sel_phi1,dim_sel_phi1_dual,dim_sel_phi2,dim_sel_phi2_dual,dim_sel2,u1,u2,u0,defect,loc_image_dim,flags";

/// Computes the record for one twist. Failures are isolated into the
/// record's violation list, never propagated.
pub fn twist_record(e: &CurveModel, d: i64, with_bases: bool) -> TwistRecord {
    let case = match classify_case(e) {
        Ok(c) => c,
        Err(err) => {
            let mut rec = TwistRecord::empty(d, "?");
            rec.violations.push(format!("classify: {err}"));
            return rec;
        }
    };
    let mut rec = TwistRecord::empty(d, case.name());
    let result = fill_record(e, &case, d, with_bases, &mut rec);
    if let Err(err) = result {
        rec.violations.push(err.to_string());
    }
    rec
}

fn fill_record(
    e: &CurveModel,
    case: &CaseLabel,
    d: i64,
    with_bases: bool,
    rec: &mut TwistRecord,
) -> Result<()> {
    // Edge 1 is the first balanced isogeny when present, else the isogeny
    // with kernel at the origin.
    let edge1 = match case {
        CaseLabel::IV { balanced } => *balanced,
        CaseLabel::V { balanced_1, .. } => *balanced_1,
        _ => crate::curves::TwoIsogeny::from_kernel(e, 0)?,
    };
    let dual1 = edge1.dual()?;
    let e1 = descend_edge(&edge1, d)?;
    let e1d = descend_edge(&dual1, d)?;
    rec.dim_sel_phi1 = Some(e1.selmer.dim());
    rec.dim_sel_phi1_dual = Some(e1d.selmer.dim());
    rec.u1 = Some(e1d.u);
    if with_bases {
        rec.sel_phi1_dual_basis = Some(e1d.selmer.basis.iter().map(|b| b[0].clone()).collect());
    }
    // Greenberg-Wiles and antisymmetry, exact per twist.
    if e1.u != e1.selmer.dim() as i64 - e1d.selmer.dim() as i64 {
        rec.violations.push(format!(
            "greenberg-wiles: u {} != {} - {}",
            e1.u,
            e1.selmer.dim(),
            e1d.selmer.dim()
        ));
    }
    if e1.u != -e1d.u {
        rec.violations.push("u antisymmetry".into());
    }
    if two_torsion_halved(&edge1.source.twist(d)?) || two_torsion_halved(&edge1.target.twist(d)?) {
        rec.flags.push("torsion4".into());
    }

    // Full 2-descent wherever the curve has full rational 2-torsion.
    if e.has_full_two_torsion() {
        let sel2 = two_selmer(e, d)?;
        rec.dim_sel2 = Some(sel2.dim());
        if with_bases {
            rec.sel2_basis = Some(sel2.basis.clone());
        }
        // The descent exact sequence forces dim Sel2 <= dim + dim(dual).
        if sel2.dim() > e1.selmer.dim() + e1d.selmer.dim() {
            rec.violations.push("selmer sandwich".into());
        }
    }

    if let CaseLabel::V { balanced_2, .. } = case {
        let dual2 = balanced_2.dual()?;
        let e2 = descend_edge(balanced_2, d)?;
        let e2d = descend_edge(&dual2, d)?;
        rec.dim_sel_phi2 = Some(e2.selmer.dim());
        rec.dim_sel_phi2_dual = Some(e2d.selmer.dim());
        rec.u2 = Some(e2d.u);
        if e2.u != e2.selmer.dim() as i64 - e2d.selmer.dim() as i64 {
            rec.violations.push("greenberg-wiles (edge 2)".into());
        }
        let u0 = -e1d.u - e2d.u;
        rec.u0 = Some(u0);
        if u0 < 0 || u0 % 2 != 0 {
            rec.violations.push(format!("u0 = {u0} not even nonnegative"));
        }
        if two_torsion_halved(&balanced_2.target.twist(d)?) {
            if !rec.flags.contains(&"torsion4".to_string()) {
                rec.flags.push("torsion4".into());
            }
        }
        match localization_image(e, d) {
            Ok(li) => {
                rec.loc_image_dim = Some(li.image.dim());
                if li.ambient_dim as i64 != u0 {
                    rec.violations.push(format!(
                        "localization ambient {} != u0 {u0}",
                        li.ambient_dim
                    ));
                }
            }
            Err(err) => rec.violations.push(format!("localization: {err}")),
        }
        let check = case_v_rank_identity_check(e, d)?;
        rec.defect = Some(check.defect);
        if !check.flagged && !check.ok {
            rec.violations.push(format!(
                "defect identity: defect {} u0 {}",
                check.defect, check.u0
            ));
        }
    }
    Ok(())
}

/// Sweep summary with per-twist records in d-sorted order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub curve: CurveModel,
    pub d0: i64,
    pub height: i64,
    pub records: Vec<TwistRecord>,
    pub flagged: usize,
    pub violations: Vec<String>,
    pub elapsed_ms: u128,
    pub threads: usize,
}

impl SweepResult {
    /// Empirical law of the descent rank over non-flagged twists.
    pub fn empirical_r_phi(&self) -> Result<RankDistribution> {
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        for rec in self.records.iter().filter(|r| !r.is_flagged()) {
            if let Some(r) = rec.r_phi() {
                if r >= 0 {
                    *counts.entry(r as u32).or_insert(0) += 1;
                }
            }
        }
        RankDistribution::from_counts(&counts)
    }

    /// Empirical law of the 2-descent rank over non-flagged twists.
    pub fn empirical_r2(&self) -> Result<RankDistribution> {
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        for rec in self.records.iter().filter(|r| !r.is_flagged()) {
            if let Some(r) = rec.r2() {
                if r >= 0 {
                    *counts.entry(r as u32).or_insert(0) += 1;
                }
            }
        }
        RankDistribution::from_counts(&counts)
    }

    /// Joint (r_phi, r2) counts over non-flagged twists.
    pub fn joint_counts(&self) -> BTreeMap<(i64, i64), u64> {
        let mut counts = BTreeMap::new();
        for rec in self.records.iter().filter(|r| !r.is_flagged()) {
            if let (Some(rp), Some(r2)) = (rec.r_phi(), rec.r2()) {
                *counts.entry((rp, r2)).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Localization-image dimension counts keyed by the conditioning rank
    /// `dim Sel(edge 1) - 1`.
    pub fn loc_image_counts(&self) -> BTreeMap<(i64, usize), u64> {
        let mut counts = BTreeMap::new();
        for rec in self.records.iter().filter(|r| !r.is_flagged()) {
            if let (Some(dim1), Some(li)) = (rec.dim_sel_phi1, rec.loc_image_dim) {
                *counts.entry((dim1 as i64 - 1, li)).or_insert(0) += 1;
            }
        }
        counts
    }

    /// The constant Tamagawa exponent of the class, when it is constant.
    pub fn class_u(&self) -> Option<i64> {
        let mut us = self
            .records
            .iter()
            .filter(|r| !r.is_flagged())
            .filter_map(|r| r.u1);
        let first = us.next()?;
        us.all(|u| u == first).then_some(first)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for rec in &self.records {
            out.push_str(&rec.csv_row());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoreLine {
    curve: CurveModel,
    d0: i64,
    record: TwistRecord,
}

fn load_store(path: &PathBuf, curve: &CurveModel, d0: i64) -> Result<BTreeMap<i64, TwistRecord>> {
    let mut out = BTreeMap::new();
    if !path.exists() {
        return Ok(out);
    }
    let file = std::fs::File::open(path)?;
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Ok(parsed) = serde_json::from_str::<StoreLine>(&line) else {
            continue; // torn tail line from an interrupted run
        };
        if parsed.curve == *curve && parsed.d0 == d0 {
            out.insert(parsed.record.d, parsed.record);
        }
    }
    Ok(out)
}

fn append_store(
    path: &PathBuf,
    curve: &CurveModel,
    d0: i64,
    records: &[TwistRecord],
) -> Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    for record in records {
        let line = serde_json::to_string(&StoreLine {
            curve: *curve,
            d0,
            record: record.clone(),
        })?;
        writeln!(file, "{line}")?;
    }
    Ok(())
}

fn compute_batch(e: &CurveModel, ds: &[i64], threads: usize, with_bases: bool) -> Vec<TwistRecord> {
    #[cfg(feature = "parallel")]
    if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        return pool.install(|| {
            ds.par_iter()
                .map(|&d| twist_record(e, d, with_bases))
                .collect()
        });
    }
    let _ = threads;
    ds.iter().map(|&d| twist_record(e, d, with_bases)).collect()
}

/// Runs the descent sweep over a twist class.
pub fn sweep(e: &CurveModel, spec: &TwistClassSpec, config: &SweepConfig) -> Result<SweepResult> {
    let ds = super::sieve::enumerate_twist_class(spec, config.height)?;
    sweep_records(e, spec.d0, &ds, config)
}

/// Runs the sweep over an explicit twist list (already squarefree).
pub fn sweep_records(
    e: &CurveModel,
    d0: i64,
    ds: &[i64],
    config: &SweepConfig,
) -> Result<SweepResult> {
    let start = Instant::now();
    let mut done: BTreeMap<i64, TwistRecord> = match &config.store {
        Some(path) => load_store(path, e, d0)?,
        None => BTreeMap::new(),
    };
    let pending: Vec<i64> = ds.iter().copied().filter(|d| !done.contains_key(d)).collect();
    // Chunked so an interrupted run leaves a resumable store.
    for chunk in pending.chunks(256) {
        let records = compute_batch(e, chunk, config.threads, config.with_bases);
        if let Some(path) = &config.store {
            append_store(path, e, d0, &records)?;
        }
        for r in records {
            done.insert(r.d, r);
        }
    }
    let records: Vec<TwistRecord> = ds.iter().filter_map(|d| done.remove(d)).collect();
    let flagged = records.iter().filter(|r| r.is_flagged()).count();
    let violations: Vec<String> = records
        .iter()
        .flat_map(|r| r.violations.iter().map(move |v| format!("d={}: {v}", r.d)))
        .collect();
    Ok(SweepResult {
        curve: *e,
        d0,
        height: config.height,
        records,
        flagged,
        violations,
        elapsed_ms: start.elapsed().as_millis(),
        threads: config.threads,
    })
}

/// JSON report comparing empirical and model distributions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub curve: String,
    pub d0: i64,
    #[serde(rename = "H")]
    pub h: i64,
    pub counts: BTreeMap<String, u64>,
    pub empirical_dists: BTreeMap<String, BTreeMap<u32, f64>>,
    pub model_dists: BTreeMap<String, BTreeMap<u32, f64>>,
    pub tv_distances: BTreeMap<String, f64>,
    pub invariant_violations: Vec<String>,
}

/// Builds the report for a sweep: empirical descent-rank law against the
/// limiting rectangular law at the class's constant exponent, plus the
/// 2-descent marginal when available.
pub fn write_report(result: &SweepResult) -> Result<SweepReport> {
    let mut counts = BTreeMap::new();
    counts.insert("twists".into(), result.records.len() as u64);
    counts.insert("flagged".into(), result.flagged as u64);
    counts.insert("violations".into(), result.violations.len() as u64);

    let mut empirical = BTreeMap::new();
    let mut model = BTreeMap::new();
    let mut tv = BTreeMap::new();

    if let Ok(emp) = result.empirical_r_phi() {
        if let Some(u) = result.class_u() {
            let max_r = emp.max_rank().unwrap_or(0) + 6;
            let mut probs = BTreeMap::new();
            for r in 0..=max_r {
                let p = crate::randmodel::p_mat_limit(r, u, 1e-12);
                if p > 0.0 {
                    probs.insert(r, p);
                }
            }
            let model_dist = RankDistribution::from_probs(probs, 0.0, 1e-10);
            tv.insert("r_phi".into(), emp.tv_distance(&model_dist));
            model.insert(
                "r_phi".into(),
                model_dist.support().map(|r| (r, model_dist.prob(r))).collect(),
            );
        }
        empirical.insert(
            "r_phi".into(),
            emp.support().map(|r| (r, emp.prob(r))).collect(),
        );
    }
    if let Ok(emp2) = result.empirical_r2() {
        empirical.insert(
            "r2".into(),
            emp2.support().map(|r| (r, emp2.prob(r))).collect(),
        );
    }

    Ok(SweepReport {
        curve: result.curve.to_string(),
        d0: result.d0,
        h: result.height,
        counts,
        empirical_dists: empirical,
        model_dists: model,
        tv_distances: tv,
        invariant_violations: result.violations.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(a: i64, b: i64) -> CurveModel {
        CurveModel::new(a, b).unwrap()
    }

    #[test]
    fn sweep_is_deterministic_across_thread_counts() {
        let e = curve(5, 4);
        let spec = TwistClassSpec::new(&e, 1).unwrap();
        let config1 = SweepConfig {
            height: 300,
            threads: 1,
            ..Default::default()
        };
        let config4 = SweepConfig {
            height: 300,
            threads: 4,
            ..Default::default()
        };
        let r1 = sweep(&e, &spec, &config1).unwrap();
        let r4 = sweep(&e, &spec, &config4).unwrap();
        assert_eq!(r1.to_csv(), r4.to_csv());
    }

    #[test]
    fn sweep_resume_matches_fresh_run() {
        let dir = std::env::temp_dir().join(format!("twodescent-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let store = dir.join("sweep-store.jsonl");
        let _ = std::fs::remove_file(&store);

        let e = curve(5, 4);
        let spec = TwistClassSpec::new(&e, 1).unwrap();
        let mut config = SweepConfig {
            height: 200,
            threads: 1,
            store: Some(store.clone()),
            with_bases: false,
        };
        let full = sweep(&e, &spec, &config).unwrap();

        // Truncate the store to simulate an interrupted run, then resume.
        let content = std::fs::read_to_string(&store).unwrap();
        let lines: Vec<&str> = content.lines().collect();
        let keep = lines.len() / 2;
        std::fs::write(&store, lines[..keep].join("\n") + "\n{\"torn").unwrap();
        config.threads = 2;
        let resumed = sweep(&e, &spec, &config).unwrap();

        assert_eq!(full.to_csv(), resumed.to_csv());
        let _ = std::fs::remove_file(&store);
    }

    #[test]
    fn sweep_has_no_violations_on_small_case_iv() {
        let e = curve(5, 4);
        let spec = TwistClassSpec::new(&e, 1).unwrap();
        let result = sweep(
            &e,
            &spec,
            &SweepConfig {
                height: 400,
                threads: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            result.violations.is_empty(),
            "violations: {:?}",
            result.violations
        );
        assert!(result.class_u().is_some(), "u not constant over the class");
        // Support respects r >= max(u, 0).
        let u = result.class_u().unwrap();
        for rec in result.records.iter().filter(|r| !r.is_flagged()) {
            assert!(rec.r_phi().unwrap() >= u.max(0));
        }
    }

    #[test]
    fn report_shape() {
        let e = curve(5, 4);
        let spec = TwistClassSpec::new(&e, 1).unwrap();
        let result = sweep(
            &e,
            &spec,
            &SweepConfig {
                height: 300,
                threads: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let report = write_report(&result).unwrap();
        assert!(report.counts["twists"] > 0);
        assert!(report.tv_distances.contains_key("r_phi"));
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"H\""));
    }
}
