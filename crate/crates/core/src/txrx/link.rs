use alloc::vec::Vec;

use num_complex::Complex64;
// only needed when std's inherent float methods are absent
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::channel::ScenarioChannels;
use crate::codebook::{select_beamformer, BeamChoice, Codebook};
use crate::numerics::svd::pinv_from_svd;
use crate::numerics::{dot, pseudo_inverse, svd, CMatrix, RandomStream};
use crate::{Error, Result};

/// Effective channels with a condition number above this are flagged.
pub const DEGENERATE_CONDITION: f64 = 1e12;

/// Where the analog beamformer of each (array, user) pair comes from.
#[derive(Debug, Clone, Copy)]
pub enum BeamSource<'a> {
    /// Per-channel F_A built from that channel's own path AoDs.
    ArrayResponse,
    /// One shared codebook (F_B).
    Shared(&'a Codebook),
}

/// Everything the BS and the users derive from one channel realization.
///
/// Index conventions (all zero-based): `a` is a BS array (or, for the
/// classical baseline, an antenna inside a user's group), `i` the receiving
/// user, `j` the user whose stream is sent.
#[derive(Debug, Clone)]
pub struct LinkDesign {
    k: usize,
    n_a: usize,
    n_r: usize,
    beams: Vec<Option<BeamChoice>>,
    /// `H_{a,i} f_{a,j}` (N_R entries) at `(i * n_a + a) * k + j`
    responses: Vec<Vec<Complex64>>,
    /// `H_i = [H_{1,i} f_{1,i} … H_{N_A,i} f_{N_A,i}]`, N_R×N_A
    stacked: Vec<CMatrix>,
    /// `W_i = (H_i†)ᴴ`, N_R×N_A
    combiners: Vec<CMatrix>,
    /// `w_{a_i,i}ᴴ H_{a_j,i} f_{a_j,j}` at `((i * n_a + a_i) * k + j) * n_a + a_j`
    cross: Vec<Complex64>,
    beta: f64,
}

impl LinkDesign {
    /// Builds combiners and cross terms from per-hypothesis response vectors;
    /// `responses` uses the layout documented on the struct.
    pub fn from_responses(k: usize, n_a: usize, n_r: usize, responses: Vec<Vec<Complex64>>) -> Result<Self> {
        if k == 0 || n_a == 0 || n_r == 0 {
            return Err(Error::invalid("k, n_a and n_r must be positive"));
        }
        if responses.len() != k * n_a * k || responses.iter().any(|v| v.len() != n_r) {
            return Err(Error::dims("response table does not match (k, n_a, n_r)"));
        }
        let idx = |i: usize, a: usize, j: usize| (i * n_a + a) * k + j;
        let mut stacked = Vec::with_capacity(k);
        let mut combiners = Vec::with_capacity(k);
        for i in 0..k {
            let hi = CMatrix::from_fn(n_r, n_a, |r, a| responses[idx(i, a, i)][r]);
            combiners.push(pseudo_inverse(&hi)?.adjoint());
            stacked.push(hi);
        }
        let mut cross = Vec::with_capacity(k * n_a * k * n_a);
        for i in 0..k {
            let w = &combiners[i];
            for ai in 0..n_a {
                let wcol = w.column(ai);
                for j in 0..k {
                    for aj in 0..n_a {
                        cross.push(dot(&wcol, &responses[idx(i, aj, j)]));
                    }
                }
            }
        }
        Ok(Self {
            k,
            n_a,
            n_r,
            beams: alloc::vec![None; n_a * k],
            responses,
            stacked,
            combiners,
            cross,
            beta: 1.0,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_users(&self) -> usize {
        self.k
    }

    pub fn n_arrays(&self) -> usize {
        self.n_a
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Analog beam chosen for array `a` towards user `j` (HBF designs only).
    pub fn beam(&self, a: usize, j: usize) -> Option<BeamChoice> {
        self.beams[a * self.k + j]
    }

    pub fn response(&self, i: usize, a: usize, j: usize) -> &[Complex64] {
        &self.responses[(i * self.n_a + a) * self.k + j]
    }

    pub fn stacked_channel(&self, i: usize) -> &CMatrix {
        &self.stacked[i]
    }

    /// `W_i`; column `a` is `w_{a,i}`.
    pub fn combiner_matrix(&self, i: usize) -> &CMatrix {
        &self.combiners[i]
    }

    #[inline]
    pub fn cross_term(&self, i: usize, ai: usize, j: usize, aj: usize) -> Complex64 {
        self.cross[((i * self.n_a + ai) * self.k + j) * self.n_a + aj]
    }

    fn check_selection(&self, selection: &[usize]) -> Result<()> {
        if selection.len() != self.k || selection.iter().any(|&a| a >= self.n_a) {
            return Err(Error::invalid("array selection must hold one valid index per user"));
        }
        Ok(())
    }

    /// K×K `H_eff` for the arrays selected by the users' spatial bits.
    pub fn effective_channel(&self, selection: &[usize]) -> Result<CMatrix> {
        self.check_selection(selection)?;
        Ok(CMatrix::from_fn(self.k, self.k, |i, j| {
            self.cross_term(i, selection[i], j, selection[j])
        }))
    }

    pub fn precoder(&self, selection: &[usize]) -> Result<Precoder> {
        zf_precoder(&self.effective_channel(selection)?, self.beta)
    }
}

/// Selects the beam of every (array, user) pair and derives the combiners.
pub fn design_link(scenario: &ScenarioChannels, source: BeamSource<'_>) -> Result<LinkDesign> {
    let (n_a, k, n_t, n_r) = (scenario.n_arrays(), scenario.n_users(), scenario.n_t(), scenario.n_r());
    let mut beams = Vec::with_capacity(n_a * k);
    let mut beamformers: Vec<Vec<Complex64>> = Vec::with_capacity(n_a * k);
    for a in 0..n_a {
        for j in 0..k {
            let ch = scenario.get(a, j);
            let (choice, f) = match source {
                BeamSource::ArrayResponse => {
                    let cb = Codebook::array_response(&ch.paths, n_t)?;
                    let c = select_beamformer(&ch.h, &cb)?;
                    (c, cb.codeword(c.index).to_vec())
                }
                BeamSource::Shared(cb) => {
                    let c = select_beamformer(&ch.h, cb)?;
                    (c, cb.codeword(c.index).to_vec())
                }
            };
            beams.push(Some(choice));
            beamformers.push(f);
        }
    }
    let mut responses = Vec::with_capacity(k * n_a * k);
    for i in 0..k {
        for a in 0..n_a {
            let h = &scenario.get(a, i).h;
            for j in 0..k {
                responses.push(h.mul_vec(&beamformers[a * k + j])?);
            }
        }
    }
    debug_assert_eq!(responses.len(), k * n_a * k);
    let mut design = LinkDesign::from_responses(k, n_a, n_r, responses)?;
    design.beams = beams;
    Ok(design)
}

#[derive(Debug, Clone)]
pub struct Precoder {
    /// `P = β H_eff†`; row j is `p_{a_j,j}`.
    pub matrix: CMatrix,
    pub condition: f64,
    /// Condition number above [`DEGENERATE_CONDITION`]. The matrix is still
    /// the pseudo-inverse and is used as is.
    pub degenerate: bool,
}

pub fn zf_precoder(h_eff: &CMatrix, beta: f64) -> Result<Precoder> {
    let d = svd(h_eff)?;
    let tol = h_eff.rows().max(h_eff.cols()) as f64 * f64::EPSILON;
    let condition = d.condition_number();
    let matrix = pinv_from_svd(&d, tol).scale(Complex64::new(beta, 0.0));
    Ok(Precoder {
        matrix,
        condition,
        degenerate: !(condition <= DEGENERATE_CONDITION),
    })
}

/// How per-realization samples are folded into a single β.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaRule {
    /// `β = E{ sqrt(K / tr(H_eff† H_eff†ᴴ)) }`
    #[default]
    MeanOfRoot,
    /// `β = sqrt(K / E{ tr(H_eff† H_eff†ᴴ) })`
    RootOfMean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSample {
    pub users: usize,
    /// `tr(H_eff† (H_eff†)ᴴ) = ‖H_eff†‖_F²`
    pub trace: f64,
    pub degenerate: bool,
}

pub fn beta_sample(design: &LinkDesign, selection: &[usize]) -> Result<BetaSample> {
    let p = zf_precoder(&design.effective_channel(selection)?, 1.0)?;
    Ok(BetaSample {
        users: design.n_users(),
        trace: p.matrix.frobenius_norm_sq(),
        degenerate: p.degenerate,
    })
}

pub fn random_selection<R: Rng + ?Sized>(k: usize, n_a: usize, rng: &mut R) -> Vec<usize> {
    (0..k).map(|_| rng.random_range(0..n_a)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaEstimate {
    pub beta: f64,
    pub realizations: usize,
    pub degenerate: usize,
}

/// Folds traces (in realization order) into β. Non-finite or zero traces
/// are skipped.
pub fn combine_beta(samples: &[BetaSample], rule: BetaRule) -> BetaEstimate {
    let usable: Vec<f64> = samples
        .iter()
        .map(|s| s.trace)
        .filter(|t| t.is_finite() && *t > 0.0)
        .collect();
    let n = usable.len().max(1) as f64;
    let kf = samples.first().map_or(1, |s| s.users) as f64;
    let beta = match rule {
        BetaRule::MeanOfRoot => usable.iter().map(|t| (kf / t).sqrt()).sum::<f64>() / n,
        BetaRule::RootOfMean => (kf / (usable.iter().sum::<f64>() / n)).sqrt(),
    };
    BetaEstimate {
        beta,
        realizations: samples.len(),
        degenerate: samples.iter().filter(|s| s.degenerate).count(),
    }
}

/// Realization `r` draws its design from `stream.child(r).named("channels")`
/// and a uniformly random selection tuple from
/// `stream.child(r).named("selection")`.
pub fn beta_realization(
    stream: &RandomStream,
    r: usize,
    draw_design: &impl Fn(&RandomStream) -> Result<LinkDesign>,
) -> Result<BetaSample> {
    let s = stream.child(r as u64);
    let design = draw_design(&s.named("channels"))?;
    let sel = random_selection(design.n_users(), design.n_arrays(), &mut s.named("selection").rng());
    beta_sample(&design, &sel)
}

pub fn estimate_beta(
    realizations: usize,
    rule: BetaRule,
    stream: &RandomStream,
    draw_design: impl Fn(&RandomStream) -> Result<LinkDesign>,
) -> Result<BetaEstimate> {
    if realizations == 0 {
        return Err(Error::invalid("beta estimation needs at least one realization"));
    }
    let samples = (0..realizations)
        .map(|r| beta_realization(stream, r, &draw_design))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_beta(&samples, rule))
}
