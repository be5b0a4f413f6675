use std::f64::consts::{FRAC_PI_2, PI};

use super::{BranchJump, DispersionCurve, DispersionPoint, SweepError};

/// Branch fixed at the first (lowest) frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnchorPolicy {
    /// Principal branch, positive phase for lossless ties.
    LowestFrequency,
    /// Candidate nearest this `beta` (rad/m).
    Beta(f64),
}

impl AnchorPolicy {
    fn describe(&self) -> String {
        match self {
            AnchorPolicy::LowestFrequency => {
                "lowest frequency, principal branch (m = 0), positive beta".to_string()
            }
            AnchorPolicy::Beta(b) => format!("lowest frequency, branch nearest beta = {b} rad/m"),
        }
    }
}

/// Relative distance, in radians per cell, under which two candidates are
/// considered equally close to the prediction.
const TIE_RAD: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    beta: f64,
    alpha: f64,
}

/// Roots a point could stand for: its oriented root and, when the
/// orientation was a convention rather than physics, the mirrored root.
fn bases(point: &DispersionPoint) -> Vec<Candidate> {
    let mut out = vec![Candidate {
        beta: point.beta,
        alpha: point.alpha,
    }];
    if point.orientation.is_tie() || point.flags.orientation_ambiguous {
        out.push(Candidate {
            beta: -point.beta,
            alpha: -point.alpha,
        });
    }
    out
}

/// Best branch of `base` near `target`.
fn on_branch(base: Candidate, target: f64, period: f64) -> Candidate {
    let step = 2.0 * PI / period;
    let m = ((target - base.beta) / step).round();
    Candidate {
        beta: base.beta + m * step,
        alpha: base.alpha,
    }
}

fn pick(candidates: &[Candidate], target: f64, period: f64) -> Candidate {
    let mut best = candidates[0];
    for &c in &candidates[1..] {
        let (d_best, d_c) = ((best.beta - target).abs(), (c.beta - target).abs());
        if (d_c - d_best).abs() * period <= TIE_RAD {
            // Equally close: keep the phase constant rising with frequency.
            if c.beta > best.beta {
                best = c;
            }
        } else if d_c < d_best {
            best = c;
        }
    }
    best
}

/// Assigns branch offsets so `beta` changes as little as possible from
/// one frequency to the next.
///
/// Each point is placed on the branch closest to a linear extrapolation of
/// the two previously accepted points. Lossless points whose orientation was
/// a tie may also flip to their mirrored root, which is what lets `beta p`
/// run continuously through pi into higher passbands. Jumps still larger
/// than pi/2 per cell are recorded as warnings.
pub fn unwrap_curve(
    points: Vec<DispersionPoint>,
    period: f64,
    anchor: AnchorPolicy,
) -> Result<DispersionCurve, SweepError> {
    if points.len() < 2 {
        return Err(SweepError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    if let Some(i) = points
        .windows(2)
        .position(|w| !(w[1].frequency > w[0].frequency))
    {
        return Err(SweepError::NonMonotonicFrequency(i + 1));
    }

    let mut out: Vec<DispersionPoint> = Vec::with_capacity(points.len());
    let mut warnings = Vec::new();
    for (i, point) in points.iter().enumerate() {
        let chosen = if i == 0 {
            match anchor {
                AnchorPolicy::LowestFrequency => Candidate {
                    beta: point.beta,
                    alpha: point.alpha,
                },
                AnchorPolicy::Beta(target) => {
                    let cands: Vec<_> = bases(point)
                        .into_iter()
                        .map(|b| on_branch(b, target, period))
                        .collect();
                    pick(&cands, target, period)
                }
            }
        } else {
            let prev = &out[i - 1];
            let target = if i >= 2 {
                let before = &out[i - 2];
                let slope = (prev.beta - before.beta) / (prev.frequency - before.frequency);
                prev.beta + slope * (point.frequency - prev.frequency)
            } else {
                prev.beta
            };
            let cands: Vec<_> = bases(point)
                .into_iter()
                .map(|b| on_branch(b, target, period))
                .collect();
            let chosen = pick(&cands, target, period);
            let jump = (chosen.beta - prev.beta) * period;
            if jump.abs() > FRAC_PI_2 {
                warnings.push(BranchJump {
                    frequency: point.frequency,
                    jump_rad: jump,
                });
            }
            chosen
        };
        out.push(DispersionPoint {
            beta: chosen.beta,
            alpha: chosen.alpha,
            beta_p: chosen.beta * period,
            ..*point
        });
    }

    Ok(DispersionCurve {
        points: out,
        period,
        harmonic: 0,
        branch_anchor: anchor.describe(),
        stopbands: Vec::new(),
        warnings,
    })
}
