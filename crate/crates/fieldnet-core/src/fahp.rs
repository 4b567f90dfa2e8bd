//! Fuzzy multi-criteria ranking: triangular-fuzzy pairwise comparison
//! matrices, geometric-mean weight derivation with centroid defuzzification,
//! and the shipped technology-selection model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for reciprocity/diagonal checks.
const CHECK_EPS: f64 = 1e-9;

/// Spread factor applied around modal ratios when building matrices from a
/// priority vector: entry = (m/SPREAD, m, m*SPREAD).
pub const DEFAULT_SPREAD: f64 = 1.25;

/// Random-index table for the consistency ratio, indexed by matrix dimension
/// (Saaty's simulation values; dimensions 1 and 2 are always consistent).
const RANDOM_INDEX: [f64; 11] = [
    0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49,
];

/// A triangular fuzzy number (lower, modal, upper).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct TriangularFuzzy {
    pub l: f64,
    pub m: f64,
    pub u: f64,
}

impl TriangularFuzzy {
    pub fn new(l: f64, m: f64, u: f64) -> Result<Self> {
        if !(l.is_finite() && m.is_finite() && u.is_finite()) || !(l <= m && m <= u) {
            return Err(Error::Validation(format!(
                "triangular number requires finite l <= m <= u, got ({l}, {m}, {u})"
            )));
        }
        Ok(TriangularFuzzy { l, m, u })
    }

    /// Crisp equivalent comparison value (1,1,1).
    pub fn one() -> Self {
        TriangularFuzzy { l: 1.0, m: 1.0, u: 1.0 }
    }

    /// Fuzzy reciprocal: (1/u, 1/m, 1/l).
    pub fn reciprocal(&self) -> Self {
        TriangularFuzzy {
            l: 1.0 / self.u,
            m: 1.0 / self.m,
            u: 1.0 / self.l,
        }
    }

    /// Centroid defuzzification.
    pub fn centroid(&self) -> f64 {
        (self.l + self.m + self.u) / 3.0
    }
}

impl TryFrom<[f64; 3]> for TriangularFuzzy {
    type Error = Error;
    fn try_from(a: [f64; 3]) -> Result<Self> {
        TriangularFuzzy::new(a[0], a[1], a[2])
    }
}

impl From<TriangularFuzzy> for [f64; 3] {
    fn from(t: TriangularFuzzy) -> Self {
        [t.l, t.m, t.u]
    }
}

/// A square pairwise-comparison matrix of triangular fuzzy numbers,
/// stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyMatrix {
    pub n: usize,
    entries: Vec<TriangularFuzzy>,
}

impl FuzzyMatrix {
    /// All-(1,1,1) matrix: every option judged equal.
    pub fn identity(n: usize) -> Self {
        FuzzyMatrix {
            n,
            entries: vec![TriangularFuzzy::one(); n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> TriangularFuzzy {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TriangularFuzzy) {
        self.entries[i * self.n + j] = v;
    }

    /// Build a reciprocity-exact matrix from row-major triples.
    pub fn from_rows(rows: &[Vec<[f64; 3]>]) -> Result<Self> {
        let n = rows.len();
        let mut m = FuzzyMatrix::identity(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, t) in row.iter().enumerate() {
                m.set(i, j, TriangularFuzzy::new(t[0], t[1], t[2])?);
            }
        }
        Ok(m)
    }

    /// Build a ratio-consistent matrix from a strictly positive priority
    /// vector: entry (i,j) has modal value v_i/v_j widened by `spread`, and
    /// the mirror entry is stored as an exact fuzzy reciprocal.
    pub fn from_priority_vector(v: &[f64], spread: f64) -> Result<Self> {
        if !(spread >= 1.0) {
            return Err(Error::Domain {
                what: "spread",
                value: spread,
            });
        }
        if v.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Validation(
                "priority vector entries must be positive".into(),
            ));
        }
        let n = v.len();
        let mut m = FuzzyMatrix::identity(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let ratio = v[i] / v[j];
                let t = TriangularFuzzy::new(ratio / spread, ratio, ratio * spread)?;
                m.set(i, j, t);
                m.set(j, i, t.reciprocal());
            }
        }
        Ok(m)
    }

    /// Transpose the matrix, replacing each entry with its fuzzy reciprocal.
    /// Applying this twice returns the original matrix.
    pub fn transpose_reciprocal(&self) -> Self {
        let mut out = FuzzyMatrix::identity(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j).reciprocal());
            }
        }
        out
    }
}

/// Result of structural validation: unit diagonal and fuzzy reciprocity.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCheck {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Check the diagonal and reciprocity invariants within relative tolerance.
pub fn validate_matrix(m: &FuzzyMatrix) -> MatrixCheck {
    let mut violations = Vec::new();
    let close = |a: f64, b: f64| (a - b).abs() <= CHECK_EPS * a.abs().max(b.abs()).max(1.0);
    for i in 0..m.n {
        let d = m.get(i, i);
        if !(close(d.l, 1.0) && close(d.m, 1.0) && close(d.u, 1.0)) {
            violations.push(format!("diagonal ({i},{i}) is not (1,1,1)"));
        }
        for j in (i + 1)..m.n {
            let a = m.get(i, j);
            let b = m.get(j, i);
            if !(close(b.l, 1.0 / a.u) && close(b.m, 1.0 / a.m) && close(b.u, 1.0 / a.l)) {
                violations.push(format!("entry ({j},{i}) is not the reciprocal of ({i},{j})"));
            }
            if !(a.l > 0.0) {
                violations.push(format!("entry ({i},{j}) is not strictly positive"));
            }
        }
    }
    MatrixCheck {
        ok: violations.is_empty(),
        violations,
    }
}

/// Derive crisp weights by the geometric-mean method: per-row fuzzy geometric
/// mean, fuzzy normalization against the column sum, centroid
/// defuzzification, and a final normalization to sum 1.
pub fn fuzzy_weights(m: &FuzzyMatrix) -> Result<Vec<f64>> {
    let check = validate_matrix(m);
    if !check.ok {
        return Err(Error::Validation(check.violations.join("; ")));
    }
    let n = m.n;
    // Row-wise fuzzy geometric means, computed in log space.
    let mut gm = Vec::with_capacity(n);
    for i in 0..n {
        let (mut sl, mut sm, mut su) = (0.0, 0.0, 0.0);
        for j in 0..n {
            let t = m.get(i, j);
            sl += t.l.ln();
            sm += t.m.ln();
            su += t.u.ln();
        }
        let inv = 1.0 / n as f64;
        gm.push(TriangularFuzzy {
            l: (sl * inv).exp(),
            m: (sm * inv).exp(),
            u: (su * inv).exp(),
        });
    }
    let (tl, tm, tu) = gm.iter().fold((0.0, 0.0, 0.0), |(a, b, c), t| {
        (a + t.l, b + t.m, c + t.u)
    });
    // Fuzzy normalization: multiply by the inverse total (1/tu, 1/tm, 1/tl).
    let mut crisp: Vec<f64> = gm
        .iter()
        .map(|g| {
            TriangularFuzzy {
                l: g.l / tu,
                m: g.m / tm,
                u: g.u / tl,
            }
            .centroid()
        })
        .collect();
    // Indistinguishable alternatives weigh exactly 1/n: when every row
    // produced the same crisp value, normalizing through floating-point
    // sums would miss uniform by an ulp, so short-circuit it.
    if crisp.windows(2).all(|w| w[0] == w[1]) {
        return Ok(vec![1.0 / n as f64; n]);
    }
    let total: f64 = crisp.iter().sum();
    for w in &mut crisp {
        *w /= total;
    }
    Ok(crisp)
}

/// Consistency ratio of the modal (crisp) matrix: (lambda_max - n) / (n - 1)
/// divided by the random index for dimension n. Values above 0.1 indicate
/// judgments worth revisiting; callers treat that as a warning, not an error.
pub fn consistency_ratio(m: &FuzzyMatrix) -> f64 {
    let n = m.n;
    if n <= 2 {
        return 0.0;
    }
    // Principal eigenvalue of the positive modal matrix by power iteration.
    let mut v = vec![1.0; n];
    let mut lambda = n as f64;
    for _ in 0..200 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[i] += m.get(i, j).m * v[j];
            }
        }
        let norm: f64 = next.iter().sum();
        for x in &mut next {
            *x /= norm;
        }
        lambda = (0..n)
            .map(|i| {
                let row: f64 = (0..n).map(|j| m.get(i, j).m * next[j]).sum();
                row / next[i]
            })
            .sum::<f64>()
            / n as f64;
        v = next;
    }
    let ci = (lambda - n as f64) / (n as f64 - 1.0);
    let ri = RANDOM_INDEX[n.min(RANDOM_INDEX.len() - 1)];
    if ri == 0.0 {
        0.0
    } else {
        ci / ri
    }
}

/// One ranked alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub name: String,
    pub score: f64,
}

/// Alternatives ordered by non-increasing score; scores sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
}

/// Combine criterion weights with per-criterion local weights:
/// score(alt) = sum over criteria of weight(c) * local_weight(alt | c).
/// Ties keep input order (stable sort).
pub fn rank_alternatives(
    criteria_weights: &[f64],
    alt_matrices: &[FuzzyMatrix],
    alternatives: &[String],
) -> Result<Ranking> {
    if criteria_weights.len() != alt_matrices.len() {
        return Err(Error::Validation(format!(
            "{} criterion weights but {} alternative matrices",
            criteria_weights.len(),
            alt_matrices.len()
        )));
    }
    let n_alt = alternatives.len();
    let mut scores = vec![0.0; n_alt];
    for (wc, m) in criteria_weights.iter().zip(alt_matrices) {
        if m.n != n_alt {
            return Err(Error::Validation(format!(
                "alternative matrix is {}x{} but there are {n_alt} alternatives",
                m.n, m.n
            )));
        }
        let local = fuzzy_weights(m)?;
        for (s, lw) in scores.iter_mut().zip(local) {
            *s += wc * lw;
        }
    }
    let total: f64 = scores.iter().sum();
    let mut entries: Vec<RankEntry> = alternatives
        .iter()
        .zip(scores)
        .map(|(name, score)| RankEntry {
            name: name.clone(),
            score: score / total,
        })
        .collect();
    entries.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());
    Ok(Ranking { entries })
}

/// A complete ranking model: criteria comparisons plus one alternative
/// matrix per criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct FahpModel {
    pub criteria_names: Vec<String>,
    pub alternatives: Vec<String>,
    pub criteria: FuzzyMatrix,
    pub per_criterion: Vec<FuzzyMatrix>,
}

impl FahpModel {
    /// Rank the model's alternatives. Returns the ranking plus consistency
    /// warnings for any matrix whose consistency ratio exceeds 0.1.
    pub fn rank(&self) -> Result<(Ranking, Vec<String>)> {
        let weights = fuzzy_weights(&self.criteria)?;
        let ranking = rank_alternatives(&weights, &self.per_criterion, &self.alternatives)?;
        let mut warnings = Vec::new();
        let cr = consistency_ratio(&self.criteria);
        if cr > 0.1 {
            warnings.push(format!("criteria matrix consistency ratio {cr:.3} exceeds 0.1"));
        }
        for (name, m) in self.criteria_names.iter().zip(&self.per_criterion) {
            let cr = consistency_ratio(m);
            if cr > 0.1 {
                warnings.push(format!(
                    "alternative matrix for '{name}' consistency ratio {cr:.3} exceeds 0.1"
                ));
            }
        }
        Ok((ranking, warnings))
    }
}

/// The shipped 5-criterion, 6-technology model. Matrices are built
/// ratio-consistent from judgment vectors, so the derived weights reproduce
/// the vectors exactly and every consistency ratio is zero.
pub fn default_model() -> FahpModel {
    let criteria_names: Vec<String> = ["cost", "power", "range", "delay", "capacity"]
        .map(String::from)
        .to_vec();
    let alternatives: Vec<String> = ["WiFi", "LoRa", "Bluetooth", "Zigbee", "LTE", "Z-Wave"]
        .map(String::from)
        .to_vec();
    let criteria_priorities = [0.16, 0.20, 0.28, 0.16, 0.20];
    // Per-criterion local judgments over (WiFi, LoRa, Bluetooth, Zigbee,
    // LTE, Z-Wave): hardware cost favors the short-range radios, energy
    // favors the low-power meshes, reach favors LoRa/LTE, latency and
    // throughput favor WiFi.
    let locals: [[f64; 6]; 5] = [
        [0.14, 0.15, 0.24, 0.22, 0.06, 0.19], // cost
        [0.08, 0.22, 0.24, 0.24, 0.06, 0.16], // power
        [0.20, 0.34, 0.06, 0.11, 0.22, 0.07], // range
        [0.28, 0.06, 0.22, 0.16, 0.16, 0.12], // delay
        [0.34, 0.10, 0.17, 0.11, 0.22, 0.06], // capacity
    ];
    let criteria = FuzzyMatrix::from_priority_vector(&criteria_priorities, DEFAULT_SPREAD)
        .expect("criteria priorities are positive");
    let per_criterion = locals
        .iter()
        .map(|v| {
            FuzzyMatrix::from_priority_vector(v, DEFAULT_SPREAD)
                .expect("local priorities are positive")
        })
        .collect();
    FahpModel {
        criteria_names,
        alternatives,
        criteria,
        per_criterion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_identity() {
        assert!(validate_matrix(&FuzzyMatrix::identity(4)).ok);
    }

    #[test]
    fn validate_accepts_crisp_reciprocal_pair() {
        let mut m = FuzzyMatrix::identity(2);
        m.set(0, 1, TriangularFuzzy::new(2.0, 2.0, 2.0).unwrap());
        m.set(1, 0, TriangularFuzzy::new(0.5, 0.5, 0.5).unwrap());
        assert!(validate_matrix(&m).ok);
    }

    #[test]
    fn validate_rejects_broken_reciprocity() {
        let mut m = FuzzyMatrix::identity(2);
        m.set(0, 1, TriangularFuzzy::new(2.0, 2.0, 2.0).unwrap());
        // (1,0) left at (1,1,1): not the reciprocal.
        let check = validate_matrix(&m);
        assert!(!check.ok);
        assert!(!check.violations.is_empty());
    }

    #[test]
    fn weights_identity_is_uniform() {
        for n in 1..=8 {
            let w = fuzzy_weights(&FuzzyMatrix::identity(n)).unwrap();
            for x in w {
                assert_eq!(x, 1.0 / n as f64);
            }
        }
    }

    #[test]
    fn weights_two_by_two_crisp() {
        let mut m = FuzzyMatrix::identity(2);
        m.set(0, 1, TriangularFuzzy::new(2.0, 2.0, 2.0).unwrap());
        m.set(1, 0, TriangularFuzzy::new(0.5, 0.5, 0.5).unwrap());
        let w = fuzzy_weights(&m).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn weights_reject_invalid_matrix() {
        let mut m = FuzzyMatrix::identity(2);
        m.set(0, 1, TriangularFuzzy::new(3.0, 3.0, 3.0).unwrap());
        assert!(matches!(fuzzy_weights(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn priority_vector_matrices_recover_their_vector() {
        let v = [0.16, 0.20, 0.28, 0.16, 0.20];
        let m = FuzzyMatrix::from_priority_vector(&v, DEFAULT_SPREAD).unwrap();
        assert!(validate_matrix(&m).ok);
        let w = fuzzy_weights(&m).unwrap();
        for (got, want) in w.iter().zip(v) {
            assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
        }
        // Spread-consistent construction keeps the modal matrix perfectly
        // consistent.
        assert!(consistency_ratio(&m) < 1e-6);
    }

    #[test]
    fn shipped_model_weights_regression() {
        let model = default_model();
        let w = fuzzy_weights(&model.criteria).unwrap();
        let expected = [0.16, 0.20, 0.28, 0.16, 0.20];
        for (got, want) in w.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn shipped_model_order_and_scores() {
        let model = default_model();
        let (ranking, warnings) = model.rank().unwrap();
        assert!(warnings.is_empty());
        let names: Vec<&str> = ranking.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(
            names,
            ["WiFi", "LoRa", "Bluetooth", "Zigbee", "LTE", "Z-Wave"]
        );
        let expected = [0.2072, 0.1928, 0.1724, 0.1616, 0.1528, 0.1132];
        for (e, want) in ranking.entries.iter().zip(expected) {
            assert!((e.score - want).abs() < 1e-9, "{}: {}", e.name, e.score);
        }
        let total: f64 = ranking.entries.iter().map(|e| e.score).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shipped_model_shape() {
        let model = default_model();
        assert_eq!(model.criteria_names.len(), 5);
        assert_eq!(model.alternatives.len(), 6);
        assert_eq!(model.per_criterion.len(), 5);
        assert!(validate_matrix(&model.criteria).ok);
        for m in &model.per_criterion {
            assert!(validate_matrix(m).ok);
        }
    }

    #[test]
    fn single_criterion_identity_gives_uniform_ranking() {
        let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let ranking = rank_alternatives(&[1.0], &[FuzzyMatrix::identity(3)], &names).unwrap();
        for e in &ranking.entries {
            assert!((e.score - 1.0 / 3.0).abs() < 1e-12);
        }
        // Tie-break keeps input order.
        let got: Vec<&str> = ranking.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(got, ["a", "b", "c"]);
    }

    #[test]
    fn degenerate_weights_follow_single_criterion() {
        let names: Vec<String> = ["a", "b"].map(String::from).to_vec();
        let mut first = FuzzyMatrix::identity(2);
        first.set(0, 1, TriangularFuzzy::new(3.0, 3.0, 3.0).unwrap());
        first.set(1, 0, first.get(0, 1).reciprocal());
        let mut second = FuzzyMatrix::identity(2);
        second.set(0, 1, TriangularFuzzy::new(0.2, 0.2, 0.2).unwrap());
        second.set(1, 0, second.get(0, 1).reciprocal());

        let r = rank_alternatives(&[1.0, 0.0], &[first.clone(), second], &names).unwrap();
        let solo = fuzzy_weights(&first).unwrap();
        assert_eq!(r.entries[0].name, "a");
        assert!((r.entries[0].score - solo[0]).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_validation_error() {
        let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let err = rank_alternatives(&[1.0], &[FuzzyMatrix::identity(2)], &names).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn transpose_reciprocal_is_involution() {
        let v = [0.3, 0.5, 0.2];
        let m = FuzzyMatrix::from_priority_vector(&v, 1.4).unwrap();
        let twice = m.transpose_reciprocal().transpose_reciprocal();
        let w1 = fuzzy_weights(&m).unwrap();
        let w2 = fuzzy_weights(&twice).unwrap();
        for (a, b) in w1.iter().zip(w2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_matrix_flags_warning() {
        // Strong cycle a > b > c > a: maximally inconsistent judgments.
        let rows = vec![
            vec![[1.0, 1.0, 1.0], [4.0, 5.0, 6.0], [1.0 / 6.0, 1.0 / 5.0, 1.0 / 4.0]],
            vec![[1.0 / 6.0, 1.0 / 5.0, 1.0 / 4.0], [1.0, 1.0, 1.0], [4.0, 5.0, 6.0]],
            vec![[4.0, 5.0, 6.0], [1.0 / 6.0, 1.0 / 5.0, 1.0 / 4.0], [1.0, 1.0, 1.0]],
        ];
        let m = FuzzyMatrix::from_rows(&rows).unwrap();
        assert!(validate_matrix(&m).ok);
        assert!(consistency_ratio(&m) > 0.1);
    }
}
