//! SINR, utilities and the jammer's closed-form best response.

use nalgebra::DMatrix;

use crate::linalg::{herm_row, normalized, unit, CMat, CVec};
use crate::scene::{ChannelSet, SceneConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Legitimate-side strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderStrategy {
    pub p_s: f64,
    pub w_s: CVec,
    pub w_d: CVec,
    /// Diagonal of the surface reflection matrix.
    pub theta: CVec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammerStrategy {
    pub p_j: f64,
    pub w_j: CVec,
}

impl LeaderStrategy {
    /// Checks unit-norm beamformers, the power budget and the amplitude bound.
    pub fn check(&self, cfg: &SceneConfig) -> Result<(), String> {
        if (self.w_s.norm() - 1.0).abs() > 1e-9 || (self.w_d.norm() - 1.0).abs() > 1e-9 {
            return Err("beamformers must have unit norm".into());
        }
        if !(self.p_s >= 0.0 && self.p_s <= cfg.p_s_max * (1.0 + 1e-9)) {
            return Err("source power outside [0, P_S_max]".into());
        }
        if self.theta.iter().any(|t| t.norm() > cfg.lambda_max * (1.0 + 1e-9)) {
            return Err("reflection amplitude above lambda_max".into());
        }
        Ok(())
    }
}

/// Cascaded and total channels for a given reflection vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    pub h_srd: CMat,
    pub h_jrd: CMat,
    pub ht_sd: CMat,
    pub ht_jd: CMat,
}

/// `H_RD diag(theta)`.
pub fn rd_theta(h_rd: &CMat, theta: &CVec) -> CMat {
    let mut m = h_rd.clone();
    for (j, t) in theta.iter().enumerate() {
        for i in 0..m.nrows() {
            m[(i, j)] *= t;
        }
    }
    m
}

pub fn effective_channels(ch: &ChannelSet, theta: &CVec) -> Result<EffectiveChannels, GameError> {
    if theta.len() != ch.n() || ch.h_rd.ncols() != ch.n() || ch.h_jr.nrows() != ch.n() {
        return Err(GameError::Shape(format!("theta has {} entries, surface has {}", theta.len(), ch.n())));
    }
    if ch.h_rd.nrows() != ch.h_sd.nrows() || ch.h_jd.nrows() != ch.h_sd.nrows() {
        return Err(GameError::Shape("destination dimensions disagree".into()));
    }
    let rt = rd_theta(&ch.h_rd, theta);
    let (h_srd, h_jrd) = if ch.n() == 0 {
        (DMatrix::zeros(ch.n_d(), ch.n_s()), DMatrix::zeros(ch.n_d(), ch.n_j()))
    } else {
        (&rt * &ch.h_sr, &rt * &ch.h_jr)
    };
    let ht_sd = &ch.h_sd + &h_srd;
    let ht_jd = &ch.h_jd + &h_jrd;
    Ok(EffectiveChannels { h_srd, h_jrd, ht_sd, ht_jd })
}

/// Scalar quantities the leader and follower utilities depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    /// `|w_D^H Ht_SD w_S|`
    pub signal: f64,
    /// `||w_D^H Ht_JD||^2`
    pub jam_gain: f64,
    /// `sigma_R^2 ||w_D^H H_RD diag(theta)||^2 + sigma_D^2`
    pub noise: f64,
}

pub fn link_gains(
    ch: &ChannelSet,
    leader: &LeaderStrategy,
    sigma_r2: f64,
    sigma_d2: f64,
) -> Result<LinkGains, GameError> {
    let eff = effective_channels(ch, &leader.theta)?;
    let signal = leader.w_d.dotc(&(&eff.ht_sd * &leader.w_s)).norm();
    let jam_gain = herm_row(&leader.w_d, &eff.ht_jd).norm_squared();
    let ris_noise = if ch.n() == 0 {
        0.0
    } else {
        herm_row(&leader.w_d, &rd_theta(&ch.h_rd, &leader.theta)).norm_squared()
    };
    Ok(LinkGains { signal, jam_gain, noise: sigma_r2 * ris_noise + sigma_d2 })
}

pub fn sinr(
    ch: &ChannelSet,
    leader: &LeaderStrategy,
    jam: &JammerStrategy,
    sigma_r2: f64,
    sigma_d2: f64,
) -> Result<f64, GameError> {
    let eff = effective_channels(ch, &leader.theta)?;
    let signal = leader.w_d.dotc(&(&eff.ht_sd * &leader.w_s)).norm_sqr();
    let jam_amp = leader.w_d.dotc(&(&eff.ht_jd * &jam.w_j)).norm_sqr();
    let ris_noise = if ch.n() == 0 {
        0.0
    } else {
        herm_row(&leader.w_d, &rd_theta(&ch.h_rd, &leader.theta)).norm_squared()
    };
    let denom = jam.p_j * jam_amp + sigma_r2 * ris_noise + sigma_d2;
    Ok(leader.p_s * signal / denom)
}

pub fn utility_jammer(
    ch: &ChannelSet,
    leader: &LeaderStrategy,
    jam: &JammerStrategy,
    cfg: &SceneConfig,
) -> Result<f64, GameError> {
    Ok(-sinr(ch, leader, jam, cfg.sigma_r2, cfg.sigma_d2)? - cfg.c_j * jam.p_j)
}

/// Leader utility `Gamma - c_S P_S` evaluated on the channels in `ch`.
pub fn utility_leader_exact(
    ch: &ChannelSet,
    leader: &LeaderStrategy,
    jam: &JammerStrategy,
    cfg: &SceneConfig,
) -> Result<f64, GameError> {
    Ok(sinr(ch, leader, jam, cfg.sigma_r2, cfg.sigma_d2)? - cfg.c_s * leader.p_s)
}

/// Optimal jamming power for a jammer whose matched-filter gain is `jam_gain`.
pub fn best_response_power(p_s: f64, signal: f64, jam_gain: f64, noise: f64, c_j: f64, p_j_max: f64) -> f64 {
    if jam_gain <= 0.0 {
        return 0.0;
    }
    let g = jam_gain.sqrt();
    let p = p_s.sqrt() * signal / (c_j.sqrt() * g) - noise / jam_gain;
    p.clamp(0.0, p_j_max)
}

/// SINR reached when the jammer best-responds with matched-filter gain `jam_gain`.
pub fn best_response_sinr(p_s: f64, signal: f64, jam_gain: f64, noise: f64, c_j: f64, p_j_max: f64) -> f64 {
    let p = best_response_power(p_s, signal, jam_gain, noise, c_j, p_j_max);
    p_s * signal * signal / (p * jam_gain + noise)
}

/// Closed-form follower best response on the channels in `ch`.
pub fn jammer_best_response(
    ch: &ChannelSet,
    leader: &LeaderStrategy,
    cfg: &SceneConfig,
) -> Result<JammerStrategy, GameError> {
    let eff = effective_channels(ch, &leader.theta)?;
    let g = eff.ht_jd.ad_mul(&leader.w_d);
    let Some(w_j) = normalized(&g) else {
        return Ok(JammerStrategy { p_j: 0.0, w_j: unit(ch.n_j(), 0) });
    };
    let gains = link_gains(ch, leader, cfg.sigma_r2, cfg.sigma_d2)?;
    let p_j = best_response_power(leader.p_s, gains.signal, gains.jam_gain, gains.noise, cfg.c_j, cfg.p_j_max);
    Ok(JammerStrategy { p_j, w_j })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use nalgebra::DVector;

    fn scalar_set(h_sd: f64, h_jd: f64) -> ChannelSet {
        let one = |x: f64| DMatrix::from_element(1, 1, real(x));
        ChannelSet {
            h_sd: one(h_sd),
            h_sr: DMatrix::zeros(0, 1),
            h_rd: DMatrix::zeros(1, 0),
            h_jd: one(h_jd),
            h_jr: DMatrix::zeros(0, 1),
            hhat_jd: one(h_jd),
            hhat_jr: DMatrix::zeros(0, 1),
            eps_jd: 0.0,
            eps_jr: 0.0,
        }
    }

    fn e1() -> CVec {
        DVector::from_element(1, real(1.0))
    }

    #[test]
    fn scalar_sinr() {
        let ch = scalar_set(2.0, 1.0);
        let l = LeaderStrategy { p_s: 1.0, w_s: e1(), w_d: e1(), theta: DVector::zeros(0) };
        let j = JammerStrategy { p_j: 3.0, w_j: e1() };
        assert!((sinr(&ch, &l, &j, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let l0 = LeaderStrategy { p_s: 0.0, ..l };
        assert_eq!(sinr(&ch, &l0, &j, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn scalar_cascade() {
        let one = |x: f64| DMatrix::from_element(1, 1, real(x));
        let ch = ChannelSet {
            h_sd: one(0.0),
            h_sr: one(1.0),
            h_rd: one(1.0),
            h_jd: one(0.0),
            h_jr: one(0.0),
            hhat_jd: one(0.0),
            hhat_jr: one(0.0),
            eps_jd: 0.0,
            eps_jr: 0.0,
        };
        let eff = effective_channels(&ch, &DVector::from_element(1, real(2.0))).unwrap();
        assert_eq!(eff.ht_sd[(0, 0)], real(2.0));
    }

    #[test]
    fn utility_arithmetic() {
        // c_J = 3, P_J = 2, Gamma = 0.5 -> -6.5
        let ch = scalar_set(1.0, 0.0);
        let cfg = SceneConfig { c_j: 3.0, sigma_d2: 1.0, sigma_r2: 1.0, ..SceneConfig::default() };
        let l = LeaderStrategy { p_s: 0.5, w_s: e1(), w_d: e1(), theta: DVector::zeros(0) };
        let j = JammerStrategy { p_j: 2.0, w_j: e1() };
        assert!((utility_jammer(&ch, &l, &j, &cfg).unwrap() + 6.5).abs() < 1e-15);
        let cfg2 = SceneConfig { c_s: 2.0, ..cfg };
        // Gamma = 0.5, c_S P_S = 1 -> -0.5
        assert!((utility_leader_exact(&ch, &l, &j, &cfg2).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_signal_means_no_jamming() {
        let ch = scalar_set(0.0, 1.0);
        let cfg = SceneConfig { sigma_d2: 1.0, ..SceneConfig::default() };
        let l = LeaderStrategy { p_s: 1.0, w_s: e1(), w_d: e1(), theta: DVector::zeros(0) };
        assert_eq!(jammer_best_response(&ch, &l, &cfg).unwrap().p_j, 0.0);
    }

    #[test]
    fn zero_jamming_channel_returns_first_axis() {
        let ch = scalar_set(1.0, 0.0);
        let cfg = SceneConfig { sigma_d2: 1.0, ..SceneConfig::default() };
        let l = LeaderStrategy { p_s: 1.0, w_s: e1(), w_d: e1(), theta: DVector::zeros(0) };
        let j = jammer_best_response(&ch, &l, &cfg).unwrap();
        assert_eq!(j.p_j, 0.0);
        assert_eq!(j.w_j, e1());
    }

    #[test]
    fn expensive_jamming_is_switched_off() {
        let ch = scalar_set(1.0, 1.0);
        let cfg = SceneConfig { sigma_d2: 1.0, c_j: 100.0, ..SceneConfig::default() };
        let l = LeaderStrategy { p_s: 1.0, w_s: e1(), w_d: e1(), theta: DVector::zeros(0) };
        assert_eq!(jammer_best_response(&ch, &l, &cfg).unwrap().p_j, 0.0);
    }
}
