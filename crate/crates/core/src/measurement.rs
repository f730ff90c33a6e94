//! Photon-count measurements on bipartite states, dichotomic outcomes,
//! correlation and CHSH estimators.
//!
//! Each site is measured in an equatorial basis {π_φ, π_φ⊥}; counts (p, q)
//! map to sign(p − q) and ties are inconclusive. Exact joint distributions
//! come straight from the Schmidt form: per site we accumulate the
//! term-by-term moments ⟨x_t| Π |x_t′⟩ for each outcome, and the joint
//! probability is Σ_tt′ w_t* w_t′ M^A_tt′ M^B_tt′. Sampling draws site A
//! from its marginal, then site B from the conditional state.

use std::collections::HashMap;
use std::sync::Arc;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QiopaError, Result};
use crate::fock::{Basis, BasisRotation, BipartiteState, FockCutoff, ModeTensor, Site};
use crate::protocols::{OFilter, TapCounts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub site: Site,
    pub basis_phase: f64,
}

impl MeasurementSetting {
    pub fn a(basis_phase: f64) -> Self {
        Self {
            site: Site::A,
            basis_phase,
        }
    }

    pub fn b(basis_phase: f64) -> Self {
        Self {
            site: Site::B,
            basis_phase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
    Inconclusive,
}

impl Outcome {
    pub fn from_counts(p: usize, q: usize) -> Self {
        match p.cmp(&q) {
            std::cmp::Ordering::Greater => Outcome::Plus,
            std::cmp::Ordering::Less => Outcome::Minus,
            std::cmp::Ordering::Equal => Outcome::Inconclusive,
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Outcome::Plus => Some(1.0),
            Outcome::Minus => Some(-1.0),
            Outcome::Inconclusive => None,
        }
    }

    fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub counts: TapCounts,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRecord {
    /// Counts (p, q) on (π_φ, π_φ⊥) of the site's setting.
    pub counts: (usize, usize),
    pub filter: Option<FilterVerdict>,
}

impl SiteRecord {
    /// sign(p − q), or inconclusive on a tie or a filter veto.
    pub fn outcome(&self) -> Outcome {
        if self.filter.is_some_and(|f| !f.accepted) {
            return Outcome::Inconclusive;
        }
        Outcome::from_counts(self.counts.0, self.counts.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub a: SiteRecord,
    pub b: SiteRecord,
}

impl MeasurementRecord {
    /// Product of the two dichotomic outcomes when both are conclusive.
    pub fn product(&self) -> Option<f64> {
        Some(self.a.outcome().value()? * self.b.outcome().value()?)
    }
}

/// Optional O-Filter in front of each site's analyzer.
#[derive(Debug, Clone, Default)]
pub struct SiteFilters {
    pub a: Option<OFilter>,
    pub b: Option<OFilter>,
}

impl SiteFilters {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn both(filter: OFilter) -> Self {
        Self {
            a: Some(filter.clone()),
            b: Some(filter),
        }
    }

    pub fn only(site: Site, filter: OFilter) -> Self {
        match site {
            Site::A => Self {
                a: Some(filter),
                b: None,
            },
            Site::B => Self {
                a: None,
                b: Some(filter),
            },
        }
    }

    fn get(&self, site: Site) -> Option<&OFilter> {
        match site {
            Site::A => self.a.as_ref(),
            Site::B => self.b.as_ref(),
        }
    }
}

fn check_settings(settings: (MeasurementSetting, MeasurementSetting)) -> Result<(f64, f64)> {
    if settings.0.site != Site::A || settings.1.site != Site::B {
        return Err(invalid("settings", "expected one setting for site A then one for site B"));
    }
    for s in [settings.0, settings.1] {
        if !s.basis_phase.is_finite() {
            return Err(invalid("settings", "basis phase must be finite"));
        }
    }
    Ok((settings.0.basis_phase, settings.1.basis_phase))
}

/// A site's tensors pushed through its filter branches and rotated into
/// the measurement basis.
struct SiteView {
    branches: Vec<(Option<FilterVerdict>, Vec<ModeTensor>)>,
    dim: usize,
}

/// One site's tensors after the filter tap, before any analyzer rotation.
struct SiteSource {
    branches: Vec<(Option<FilterVerdict>, Vec<ModeTensor>)>,
    dim: usize,
}

impl SiteSource {
    fn new(state: &BipartiteState, site: Site, filter: Option<&OFilter>) -> Self {
        // one common cutoff that holds every occupied sector, so neither the
        // filter basis nor the analyzer basis clips the state
        let top = (0..state.terms().len())
            .map(|t| state.site(site, t).top_sector())
            .max()
            .unwrap_or(0);
        let n_max = state.site(site, 0).cutoff().n_max().max(top);
        let cutoff = FockCutoff::new(n_max).expect("n_max >= 1").lenient();
        let tensors: Vec<ModeTensor> = (0..state.terms().len())
            .map(|t| state.site(site, t).embed(cutoff))
            .collect();
        let branches = match filter {
            None => vec![(None, tensors)],
            Some(f) => f
                .branches(&tensors)
                .into_iter()
                .map(|b| {
                    let verdict = FilterVerdict {
                        counts: b.counts,
                        accepted: b.accepted,
                    };
                    (Some(verdict), b.tensors)
                })
                .collect(),
        };
        Self {
            branches,
            dim: cutoff.dim(),
        }
    }
}

impl SiteView {
    fn new(state: &BipartiteState, site: Site, phase: f64, filter: Option<&OFilter>) -> Self {
        Self::rotated(&SiteSource::new(state, site, filter), phase)
    }

    fn rotated(source: &SiteSource, phase: f64) -> Self {
        let basis = Basis::equatorial(phase);
        let first = &source.branches[0].1[0];
        let rotation = BasisRotation::new(first.basis(), basis, first.cutoff().n_max());
        Self {
            branches: source
                .branches
                .iter()
                .map(|(v, tensors)| (*v, tensors.iter().map(|t| rotation.apply(t)).collect()))
                .collect(),
            dim: source.dim,
        }
    }

    fn accepted(verdict: &Option<FilterVerdict>) -> bool {
        verdict.is_none_or(|v| v.accepted)
    }

    /// moments[rejected][outcome][t * T + t′] = Σ_cells x_t(c)* x_t′(c).
    fn moments(&self, nterms: usize) -> [[Vec<Complex64>; 3]; 2] {
        let zero = || vec![Complex64::new(0.0, 0.0); nterms * nterms];
        let mut m = [[zero(), zero(), zero()], [zero(), zero(), zero()]];
        for (verdict, tensors) in &self.branches {
            let rej = usize::from(!Self::accepted(verdict));
            for p in 0..self.dim {
                for q in 0..self.dim {
                    let o = Outcome::from_counts(p, q).index();
                    let slot = &mut m[rej][o];
                    for (t, xt) in tensors.iter().enumerate() {
                        let at = xt.amp(p, q).conj();
                        if at == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for (u, xu) in tensors.iter().enumerate() {
                            slot[t * nterms + u] += at * xu.amp(p, q);
                        }
                    }
                }
            }
        }
        m
    }
}

/// Exact joint outcome probabilities.
///
/// `table[i][j]` indexes site A by `i` and site B by `j`, where an index is
/// `outcome + 3 * rejected` with outcomes ordered (+1, −1, inconclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub table: [[f64; 6]; 6],
}

impl JointDistribution {
    /// P(a, b) over records accepted by both filters.
    pub fn accepted(&self, a: Outcome, b: Outcome) -> f64 {
        self.table[a.index()][b.index()]
    }

    /// Marginal over every outcome at site A, filter verdict included.
    pub fn marginal_a(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (i, row) in self.table.iter().enumerate() {
            out[i] = row.iter().sum();
        }
        out
    }

    pub fn marginal_b(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for row in &self.table {
            for (j, v) in row.iter().enumerate() {
                out[j] += v;
            }
        }
        out
    }

    /// Probability that a record is conclusive at both sites and accepted.
    pub fn conclusive(&self) -> f64 {
        let mut s = 0.0;
        for a in [Outcome::Plus, Outcome::Minus] {
            for b in [Outcome::Plus, Outcome::Minus] {
                s += self.accepted(a, b);
            }
        }
        s
    }

    /// E = (P₊₊ + P₋₋ − P₊₋ − P₋₊) / P_conclusive.
    pub fn correlation(&self) -> Result<f64> {
        let used = self.conclusive();
        if used <= 0.0 {
            return Err(QiopaError::AllDiscarded);
        }
        let same = self.accepted(Outcome::Plus, Outcome::Plus) + self.accepted(Outcome::Minus, Outcome::Minus);
        let diff = self.accepted(Outcome::Plus, Outcome::Minus) + self.accepted(Outcome::Minus, Outcome::Plus);
        Ok(((same - diff) / used).clamp(-1.0, 1.0))
    }
}

pub fn joint_distribution(
    state: &BipartiteState,
    settings: (MeasurementSetting, MeasurementSetting),
    filters: &SiteFilters,
) -> Result<JointDistribution> {
    let (phi_a, phi_b) = check_settings(settings)?;
    let view_a = SiteView::new(state, Site::A, phi_a, filters.get(Site::A));
    let view_b = SiteView::new(state, Site::B, phi_b, filters.get(Site::B));
    joint_from_views(state, &view_a, &view_b)
}

fn joint_from_views(state: &BipartiteState, view_a: &SiteView, view_b: &SiteView) -> Result<JointDistribution> {
    let norm = state.norm_sqr();
    if norm <= 0.0 {
        return Err(QiopaError::ZeroNorm);
    }
    let nterms = state.terms().len();
    let ma = view_a.moments(nterms);
    let mb = view_b.moments(nterms);
    let mut table = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            let (xa, xb) = (&ma[i / 3][i % 3], &mb[j / 3][j % 3]);
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, st) in state.terms().iter().enumerate() {
                for (u, su) in state.terms().iter().enumerate() {
                    let k = t * nterms + u;
                    acc += st.weight.conj() * su.weight * xa[k] * xb[k];
                }
            }
            table[i][j] = acc.re / norm;
        }
    }
    Ok(JointDistribution { table })
}

/// Draws measurement records from the exact distribution.
pub struct Sampler<'s> {
    state: &'s BipartiteState,
    view_a: Arc<SiteView>,
    view_b: Arc<SiteView>,
    /// (branch, p, q) for every site-A record with nonzero probability.
    a_records: Vec<(usize, usize, usize)>,
    a_cumulative: Vec<f64>,
    b_cache: HashMap<usize, Vec<f64>>,
}

impl<'s> Sampler<'s> {
    pub fn new(
        state: &'s BipartiteState,
        settings: (MeasurementSetting, MeasurementSetting),
        filters: &SiteFilters,
    ) -> Result<Self> {
        let (phi_a, phi_b) = check_settings(settings)?;
        let view_a = Arc::new(SiteView::new(state, Site::A, phi_a, filters.get(Site::A)));
        let view_b = Arc::new(SiteView::new(state, Site::B, phi_b, filters.get(Site::B)));
        Self::from_views(state, view_a, view_b)
    }

    fn from_views(state: &'s BipartiteState, view_a: Arc<SiteView>, view_b: Arc<SiteView>) -> Result<Self> {
        let terms = state.terms();
        let nterms = terms.len();
        let mut gram = vec![Complex64::new(0.0, 0.0); nterms * nterms];
        for t in 0..nterms {
            for u in 0..nterms {
                gram[t * nterms + u] = terms[t].site_b.overlap(&terms[u].site_b)?;
            }
        }
        let mut a_records = Vec::new();
        let mut a_cumulative = Vec::new();
        let mut acc = 0.0;
        for (bi, (_, tensors)) in view_a.branches.iter().enumerate() {
            for p in 0..view_a.dim {
                for q in 0..view_a.dim {
                    let coeffs: Vec<Complex64> = terms
                        .iter()
                        .zip(tensors)
                        .map(|(term, x)| term.weight * x.amp(p, q))
                        .collect();
                    let mut prob = Complex64::new(0.0, 0.0);
                    for t in 0..nterms {
                        if coeffs[t] == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for u in 0..nterms {
                            prob += coeffs[t].conj() * coeffs[u] * gram[t * nterms + u];
                        }
                    }
                    if prob.re > 0.0 {
                        acc += prob.re;
                        a_records.push((bi, p, q));
                        a_cumulative.push(acc);
                    }
                }
            }
        }
        if a_records.is_empty() {
            return Err(QiopaError::ZeroNorm);
        }
        Ok(Self {
            state,
            view_a,
            view_b,
            a_records,
            a_cumulative,
            b_cache: HashMap::new(),
        })
    }

    fn b_distribution(&self, a_index: usize) -> Vec<f64> {
        let (bi, p, q) = self.a_records[a_index];
        let coeffs: Vec<Complex64> = self
            .state
            .terms()
            .iter()
            .zip(&self.view_a.branches[bi].1)
            .map(|(term, x)| term.weight * x.amp(p, q))
            .collect();
        let mut cumulative = Vec::with_capacity(self.view_b.branches.len() * self.view_b.dim * self.view_b.dim);
        let mut acc = 0.0;
        for (_, tensors) in &self.view_b.branches {
            for p in 0..self.view_b.dim {
                for q in 0..self.view_b.dim {
                    let amp: Complex64 = coeffs.iter().zip(tensors).map(|(c, x)| c * x.amp(p, q)).sum();
                    acc += amp.norm_sqr();
                    cumulative.push(acc);
                }
            }
        }
        cumulative
    }

    fn draw(cumulative: &[f64], rng: &mut impl Rng) -> usize {
        let total = *cumulative.last().expect("nonempty distribution");
        let u = rng.random::<f64>() * total;
        cumulative.partition_point(|c| *c <= u).min(cumulative.len() - 1)
    }

    pub fn sample(&mut self, rng: &mut impl Rng) -> MeasurementRecord {
        let ai = Self::draw(&self.a_cumulative, rng);
        if !self.b_cache.contains_key(&ai) {
            let dist = self.b_distribution(ai);
            self.b_cache.insert(ai, dist);
        }
        let bi = Self::draw(&self.b_cache[&ai], rng);
        let (branch_a, pa, qa) = self.a_records[ai];
        let cells = self.view_b.dim * self.view_b.dim;
        let branch_b = bi / cells;
        let (pb, qb) = ((bi % cells) / self.view_b.dim, bi % self.view_b.dim);
        MeasurementRecord {
            a: SiteRecord {
                counts: (pa, qa),
                filter: self.view_a.branches[branch_a].0,
            },
            b: SiteRecord {
                counts: (pb, qb),
                filter: self.view_b.branches[branch_b].0,
            },
        }
    }
}

/// Samples one joint record.
pub fn sample_counts(
    state: &BipartiteState,
    settings: (MeasurementSetting, MeasurementSetting),
    filters: &SiteFilters,
    rng: &mut impl Rng,
) -> Result<MeasurementRecord> {
    Ok(Sampler::new(state, settings, filters)?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub phi_a: f64,
    pub phi_b: f64,
    pub value: f64,
    pub standard_error: f64,
    pub n_used: usize,
    pub n_discarded: usize,
    /// Fraction of records that entered E (exact in enumeration mode).
    pub conclusive_fraction: f64,
}

/// Sampled correlation over `n_samples` records; inconclusive and vetoed
/// records are discarded.
pub fn correlation(
    state: &BipartiteState,
    settings: (MeasurementSetting, MeasurementSetting),
    n_samples: usize,
    filters: &SiteFilters,
    rng: &mut impl Rng,
) -> Result<CorrelationEstimate> {
    let mut cache = ViewCache::new(state, filters);
    sampled_estimate(&mut cache, settings, n_samples, rng)
}

fn sampled_estimate(
    cache: &mut ViewCache<'_>,
    settings: (MeasurementSetting, MeasurementSetting),
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<CorrelationEstimate> {
    if n_samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    // E only sees each site's (outcome, veto) class, so drawing from the
    // 6×6 class table has the same law as drawing full records
    let (view_a, view_b) = cache.views(settings)?;
    let joint = joint_from_views(cache.state, &view_a, &view_b)?;
    let mut cumulative = [0.0; 36];
    let mut acc = 0.0;
    for (k, c) in cumulative.iter_mut().enumerate() {
        acc += joint.table[k / 6][k % 6].max(0.0);
        *c = acc;
    }
    let (mut sum, mut used) = (0.0, 0usize);
    for _ in 0..n_samples {
        let u = rng.random::<f64>() * acc;
        let k = cumulative.partition_point(|c| *c <= u).min(35);
        let (i, j) = (k / 6, k % 6);
        // index = outcome + 3·rejected; only accepted ±1 pairs count
        if i < 2 && j < 2 {
            sum += if i == j { 1.0 } else { -1.0 };
            used += 1;
        }
    }
    if used == 0 {
        return Err(QiopaError::AllDiscarded);
    }
    let e = sum / used as f64;
    Ok(CorrelationEstimate {
        phi_a: settings.0.basis_phase,
        phi_b: settings.1.basis_phase,
        value: e,
        standard_error: ((1.0 - e * e).max(0.0) / used as f64).sqrt(),
        n_used: used,
        n_discarded: n_samples - used,
        conclusive_fraction: used as f64 / n_samples as f64,
    })
}

/// Correlation from the exact joint distribution; zero standard error.
pub fn exact_correlation(
    state: &BipartiteState,
    settings: (MeasurementSetting, MeasurementSetting),
    filters: &SiteFilters,
) -> Result<CorrelationEstimate> {
    exact_estimate(&mut ViewCache::new(state, filters), settings)
}

fn exact_estimate(
    cache: &mut ViewCache<'_>,
    settings: (MeasurementSetting, MeasurementSetting),
) -> Result<CorrelationEstimate> {
    let (view_a, view_b) = cache.views(settings)?;
    let joint = joint_from_views(cache.state, &view_a, &view_b)?;
    Ok(CorrelationEstimate {
        phi_a: settings.0.basis_phase,
        phi_b: settings.1.basis_phase,
        value: joint.correlation()?,
        standard_error: 0.0,
        n_used: 0,
        n_discarded: 0,
        conclusive_fraction: joint.conclusive(),
    })
}

/// Site views keyed by (site, phase), shared by the settings of one run;
/// reuse one cache to repeat estimates without rebuilding the views.
pub struct ViewCache<'s> {
    state: &'s BipartiteState,
    filters: &'s SiteFilters,
    sources: HashMap<Site, Arc<SiteSource>>,
    views: HashMap<(Site, u64), Arc<SiteView>>,
}

impl<'s> ViewCache<'s> {
    pub fn new(state: &'s BipartiteState, filters: &'s SiteFilters) -> Self {
        Self {
            state,
            filters,
            sources: HashMap::new(),
            views: HashMap::new(),
        }
    }

    fn view(&mut self, site: Site, phase: f64) -> Arc<SiteView> {
        if let Some(v) = self.views.get(&(site, phase.to_bits())) {
            return v.clone();
        }
        let (state, filters) = (self.state, self.filters);
        let source = self
            .sources
            .entry(site)
            .or_insert_with(|| Arc::new(SiteSource::new(state, site, filters.get(site))))
            .clone();
        let view = Arc::new(SiteView::rotated(&source, phase));
        self.views.insert((site, phase.to_bits()), view.clone());
        view
    }

    fn views(&mut self, settings: (MeasurementSetting, MeasurementSetting)) -> Result<(Arc<SiteView>, Arc<SiteView>)> {
        let (phi_a, phi_b) = check_settings(settings)?;
        Ok((self.view(Site::A, phi_a), self.view(Site::B, phi_b)))
    }

    pub fn estimate(
        &mut self,
        settings: (MeasurementSetting, MeasurementSetting),
        estimation: Estimation,
        stream: u64,
    ) -> Result<CorrelationEstimate> {
        match estimation {
            Estimation::Enumerate => exact_estimate(self, settings),
            Estimation::Sample { n_samples, seed } => {
                sampled_estimate(self, settings, n_samples, &mut stream_rng(seed, stream))
            }
        }
    }
}

/// ChaCha8 generator for sub-stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How correlations are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimation {
    Enumerate,
    /// Sub-stream k of `seed` feeds the k-th correlation of a run.
    Sample { n_samples: usize, seed: u64 },
}

pub fn estimate(
    state: &BipartiteState,
    settings: (MeasurementSetting, MeasurementSetting),
    filters: &SiteFilters,
    estimation: Estimation,
    stream: u64,
) -> Result<CorrelationEstimate> {
    ViewCache::new(state, filters).estimate(settings, estimation, stream)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub fixed: MeasurementSetting,
    pub points: Vec<CorrelationEstimate>,
    /// (E_max − E_min) / 2.
    pub visibility: f64,
}

/// Correlation versus the analyzer phase of the site not held fixed.
pub fn fringe_scan(
    state: &BipartiteState,
    fixed: MeasurementSetting,
    phases: &[f64],
    filters: &SiteFilters,
    estimation: Estimation,
) -> Result<FringeScan> {
    if phases.is_empty() {
        return Err(invalid("scan", "needs at least one phase"));
    }
    let mut cache = ViewCache::new(state, filters);
    let points = phases
        .iter()
        .enumerate()
        .map(|(k, &phi)| {
            let settings = match fixed.site {
                Site::A => (fixed, MeasurementSetting::b(phi)),
                Site::B => (MeasurementSetting::a(phi), fixed),
            };
            cache.estimate(settings, estimation, k as u64)
        })
        .collect::<Result<Vec<_>>>()?;
    let max = points.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    let min = points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    Ok(FringeScan {
        fixed,
        points,
        visibility: (max - min) / 2.0,
    })
}

/// Evenly spaced phases over [lo, hi], inclusive.
pub fn phase_range(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for ChshSettings {
    /// Optimal equatorial settings for the singlet.
    fn default() -> Self {
        Self {
            a: 0.0,
            a_prime: FRAC_PI_2,
            b: FRAC_PI_4,
            b_prime: 3.0 * FRAC_PI_4,
        }
    }
}

impl ChshSettings {
    /// (a, b), (a, b′), (a′, b), (a′, b′).
    pub fn pairs(&self) -> [(MeasurementSetting, MeasurementSetting); 4] {
        let (a, ap) = (MeasurementSetting::a(self.a), MeasurementSetting::a(self.a_prime));
        let (b, bp) = (MeasurementSetting::b(self.b), MeasurementSetting::b(self.b_prime));
        [(a, b), (a, bp), (ap, b), (ap, bp)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub settings: ChshSettings,
    pub correlations: [CorrelationEstimate; 4],
    /// S = |E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)|.
    pub s: f64,
    pub standard_error: f64,
    /// S − 2 > 3·stderr.
    pub violation: bool,
}

/// CHSH parameter. The same `filters` serve all four setting pairs.
pub fn chsh(
    state: &BipartiteState,
    settings: ChshSettings,
    filters: &SiteFilters,
    estimation: Estimation,
) -> Result<ChshResult> {
    if settings.a == settings.a_prime || settings.b == settings.b_prime {
        return Err(invalid("settings", "CHSH needs two distinct phases per site"));
    }
    let mut cache = ViewCache::new(state, filters);
    let correlations = settings
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, pair)| cache.estimate(*pair, estimation, k as u64))
        .collect::<Result<Vec<_>>>()?;
    let correlations: [CorrelationEstimate; 4] = correlations.try_into().expect("four pairs");
    let e: Vec<f64> = correlations.iter().map(|c| c.value).collect();
    let s = (e[0] - e[1] + e[2] + e[3]).abs();
    let standard_error = correlations
        .iter()
        .map(|c| c.standard_error * c.standard_error)
        .sum::<f64>()
        .sqrt();
    Ok(ChshResult {
        settings,
        correlations,
        s,
        standard_error,
        violation: s - 2.0 > 3.0 * standard_error,
    })
}

/// CSV with header `phi_a,phi_b,E,stderr,n_used,n_discarded`.
pub fn correlations_csv(rows: &[CorrelationEstimate]) -> String {
    let mut out = String::from("phi_a,phi_b,E,stderr,n_used,n_discarded\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:.12},{:.12},{},{}",
            r.phi_a, r.phi_b, r.value, r.standard_error, r.n_used, r.n_discarded
        )
        .unwrap();
    }
    out
}
