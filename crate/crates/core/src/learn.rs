//! Chow–Liu tree learning from exact tables or binary samples.

use std::io::{Read, Write};

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;

use crate::ci::{JointTable, MAX_TABLE_VARS};
use crate::error::{Error, Result};
use crate::graph::UGraph;
use crate::scalar::Real;
use crate::varset::VarSet;

/// Pairwise marginal deviation at or below which mutual information is reported as 0.
pub const MI_ZERO_TOL: f64 = 1e-10;

/// Rows of full binary assignments over named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMatrix {
    variables: Vec<String>,
    rows: Vec<Vec<bool>>,
}

impl SampleMatrix {
    pub fn new(variables: Vec<String>, rows: Vec<Vec<bool>>) -> Result<Self> {
        if variables.is_empty() || variables.len() > MAX_TABLE_VARS {
            return Err(Error::Format(format!("need 1..={MAX_TABLE_VARS} variables")));
        }
        let mut sorted = variables.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != variables.len() || variables.iter().any(String::is_empty) {
            return Err(Error::Format("variable names must be distinct and nonempty".into()));
        }
        if rows.is_empty() {
            return Err(Error::Format("no sample rows".into()));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != variables.len()) {
            return Err(Error::Format(format!("row {}: expected {} values", i + 1, variables.len())));
        }
        Ok(SampleMatrix { variables, rows })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn count(&self) -> usize {
        self.rows.len()
    }

    /// Headered CSV: first line names, then one row of `0`/`1` per sample.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let variables: Vec<String> =
            rdr.headers().map_err(|e| Error::Format(format!("header: {e}")))?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Format(format!("row {}: {e}", i + 1)))?;
            let row = record
                .iter()
                .map(|f| match f {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::Format(format!("row {}: value `{other}` is not 0 or 1", i + 1))),
                })
                .collect::<Result<Vec<bool>>>()?;
            rows.push(row);
        }
        SampleMatrix::new(variables, rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(&self.variables).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&b| if b { "1" } else { "0" })).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// Empirical table with `smoothing` pseudo-counts spread evenly over all cells.
pub fn ingest_samples(s: &SampleMatrix, smoothing: f64) -> Result<JointTable<f64>> {
    if !(smoothing >= 0.0 && smoothing.is_finite()) {
        return Err(Error::Parameter("smoothing must be a nonnegative number".into()));
    }
    let n = s.variables.len();
    let cells = 1usize << n;
    let mut counts = vec![0u64; cells];
    for row in &s.rows {
        let cell = row.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
        counts[cell] += 1;
    }
    let total = s.count() as f64 + smoothing;
    let per_cell = smoothing / cells as f64;
    let probs = counts.iter().map(|&c| (c as f64 + per_cell) / total).collect();
    JointTable::new(s.variables.clone(), probs)
}

/// Mutual information of two variables, in nats.
///
/// Pairs whose marginal product-identity deviation is at most `MI_ZERO_TOL`
/// report exactly 0.
pub fn mutual_information<T: Real>(t: &JointTable<T>, x: &str, y: &str) -> Result<T> {
    let xi = t.index_of(x)?;
    let yi = t.index_of(y)?;
    if xi == yi {
        return Err(Error::Query("mutual information needs two distinct variables".into()));
    }
    Ok(pair_mi(t, xi, yi))
}

fn pair_mi<T: Real>(t: &JointTable<T>, xi: usize, yi: usize) -> T {
    let (xs, ys) = (VarSet::singleton(xi), VarSet::singleton(yi));
    if t.ci_deviation(xs, ys, VarSet::EMPTY).as_f64() <= MI_ZERO_TOL {
        return T::zero();
    }
    let pair = t.marginalize_set(xs.union(ys));
    // pair's variables are in table order; recover (x, y) orientation-free sums
    let p = pair.probs();
    let first = [p[0] + p[1], p[2] + p[3]];
    let second = [p[0] + p[2], p[1] + p[3]];
    let mut mi = T::zero();
    for (cell, &pxy) in p.iter().enumerate() {
        if pxy <= T::zero() {
            continue;
        }
        let q = first[cell >> 1] * second[cell & 1];
        mi = mi + pxy * ((pxy - q) / q).ln_1p();
    }
    mi.max(T::zero())
}

/// All pairwise mutual informations `(x, y, I)` with `x` before `y` in table order.
pub fn pairwise_mi<T: Real>(t: &JointTable<T>) -> Vec<(String, String, T)> {
    let n = t.n();
    let v = t.variables();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    pairs.into_par_iter().map(|(i, j)| (v[i].clone(), v[j].clone(), pair_mi(t, i, j))).collect()
}

/// Maximum mutual-information spanning tree; equal weights are broken by
/// the lexicographic order of `(smaller endpoint, larger endpoint)`.
pub fn chow_liu<T: Real>(t: &JointTable<T>) -> Result<UGraph> {
    let mut pairs: Vec<(String, String, T)> =
        pairwise_mi(t).into_iter().map(|(a, b, w)| if a <= b { (a, b, w) } else { (b, a, w) }).collect();
    pairs.sort_by(|l, r| r.2.as_f64().total_cmp(&l.2.as_f64()).then_with(|| (&l.0, &l.1).cmp(&(&r.0, &r.1))));
    let v = t.variables();
    let pos = |name: &String| v.iter().position(|x| x == name).expect("table variable");
    let mut uf = UnionFind::<usize>::new(v.len());
    let mut edges = Vec::with_capacity(v.len().saturating_sub(1));
    for (a, b, _) in pairs {
        if uf.union(pos(&a), pos(&b)) {
            edges.push((a, b));
        }
    }
    UGraph::new(v.iter().cloned(), edges)
}

/// Smallest gap between consecutive sorted pairwise mutual informations
/// (infinite for fewer than two pairs).
pub fn min_mi_gap<T: Real>(t: &JointTable<T>) -> f64 {
    let mut values: Vec<f64> = pairwise_mi(t).into_iter().map(|(_, _, w)| w.as_f64()).collect();
    values.sort_by(f64::total_cmp);
    values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_gen::{chain_preset, sample_rows};
    use crate::rng::Seed;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// I(x;y) straight from a 2x2 joint, with 0 ln 0 = 0.
    fn mi_oracle(p: [[f64; 2]; 2]) -> f64 {
        let px = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
        let py = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
        let mut mi = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                if p[a][b] > 0.0 {
                    mi += p[a][b] * (p[a][b] / (px[a] * py[b])).ln();
                }
            }
        }
        mi
    }

    #[test]
    fn textbook_values() {
        let coins = JointTable::new(names(&["x", "y"]), vec![0.25; 4]).unwrap();
        assert_eq!(mutual_information(&coins, "x", "y").unwrap(), 0.0);
        let copy = JointTable::new(names(&["x", "y"]), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&copy, "x", "y").unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(mutual_information(&copy, "x", "x").is_err());
        assert!(mutual_information(&copy, "x", "q").is_err());
    }

    #[test]
    fn chain_values_follow_data_processing() {
        let t = chain_preset().table;
        // joint of (x, y) marginalizing c by hand
        let px = [0.7, 0.3];
        let pc = [[0.8, 0.2], [0.2, 0.8]];
        let py = [[0.9, 0.1], [0.4, 0.6]];
        let mut xy = [[0.0; 2]; 2];
        let mut xc = [[0.0; 2]; 2];
        for x in 0..2 {
            for c in 0..2 {
                xc[x][c] = px[x] * pc[x][c];
                for y in 0..2 {
                    xy[x][y] += px[x] * pc[x][c] * py[c][y];
                }
            }
        }
        let i_xy = mutual_information(&t, "x", "y").unwrap();
        let i_xc = mutual_information(&t, "x", "c").unwrap();
        assert!((i_xy - mi_oracle(xy)).abs() < 1e-14);
        assert!((i_xc - mi_oracle(xc)).abs() < 1e-14);
        assert!(i_xy > 0.0 && i_xy < i_xc && i_xy < mutual_information(&t, "c", "y").unwrap());
        assert_eq!(i_xy, mutual_information(&t, "y", "x").unwrap());
        let g = chow_liu(&t).unwrap();
        assert_eq!(g.edge_names(), vec![("c".to_string(), "x".to_string()), ("c".to_string(), "y".to_string())]);
    }

    #[test]
    fn product_distribution_gives_lexicographic_tree() {
        let p = [0.2, 0.5, 0.7, 0.9];
        let probs: Vec<f64> = (0..16usize)
            .map(|cell| (0..4).map(|i| if cell >> (3 - i) & 1 == 1 { p[i] } else { 1.0 - p[i] }).product::<f64>())
            .collect();
        let t = JointTable::new(names(&["d", "b", "a", "c"]), probs).unwrap();
        assert!(pairwise_mi(&t).iter().all(|(_, _, w)| *w == 0.0));
        let g = chow_liu(&t).unwrap();
        let want: Vec<(String, String)> =
            [("a", "b"), ("a", "c"), ("a", "d")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert_eq!(g.edge_names(), want);
        assert!(g.is_tree());
    }

    #[test]
    fn ingestion() {
        let all = SampleMatrix::new(
            names(&["a", "b"]),
            vec![vec![false, false], vec![false, true], vec![true, false], vec![true, true]],
        )
        .unwrap();
        assert_eq!(ingest_samples(&all, 0.0).unwrap().probs(), &[0.25; 4]);
        let same = SampleMatrix::new(names(&["a", "b"]), vec![vec![true, false]; 5]).unwrap();
        let point = ingest_samples(&same, 0.0).unwrap();
        assert_eq!(point.probs(), &[0.0, 0.0, 1.0, 0.0]);
        assert!(!point.strictly_positive());
        assert!(ingest_samples(&same, 1.0).unwrap().strictly_positive());
        assert!(ingest_samples(&same, -1.0).is_err());
    }

    #[test]
    fn chain_samples_recover_the_path() {
        let m = chain_preset();
        let s = sample_rows(&m.table, 10_000, Seed(42)).unwrap();
        let t = ingest_samples(&s, 1.0).unwrap();
        let linf = t.probs().iter().zip(m.table.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(linf <= 0.03, "{linf}");
        assert_eq!(chow_liu(&t).unwrap(), m.tree);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let s = SampleMatrix::from_csv("a, b\n0,1\n1, 1\n".as_bytes()).unwrap();
        assert_eq!(s.rows(), &[vec![false, true], vec![true, true]]);
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), "a,b\n0,1\n1,1\n");
        assert_eq!(SampleMatrix::from_csv(out.as_slice()).unwrap(), s);

        let err = SampleMatrix::from_csv("a,b\n0,1\n0,2\n".as_bytes()).unwrap_err();
        assert!(matches!(&err, Error::Format(m) if m.contains("row 2")), "{err}");
        assert!(SampleMatrix::from_csv("a,b\n0,1\n1\n".as_bytes()).is_err());
        assert!(SampleMatrix::from_csv("a,a\n0,1\n".as_bytes()).is_err());
        assert!(SampleMatrix::from_csv("a,b\n".as_bytes()).is_err());
    }
}
