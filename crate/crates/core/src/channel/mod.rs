//! BPSK over AWGN and the Monte Carlo error-rate harness.
//!
//! Frames carry the all-zero codeword (bit 0 maps to +1), so every decided
//! one is a bit error. Errors are counted over all `N` positions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::ParityCheckMatrix;
use crate::decoder::{DecodeParams, FixedPoint, FrameDecoder, LayeredDecoder, QFormat};
use crate::error::{Error, Result};
use crate::seed::derive;

/// Frames decoded between two checks of the stopping rule.
pub const BATCH: u64 = 64;

/// Noise variance at `snr_db` (Eb/N0) for code rate `rate`.
pub fn noise_variance(rate: f64, snr_db: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0))
}

/// Channel LLRs `2y/σ²` of the all-zero codeword.
pub fn awgn_llrs(n: usize, rate: f64, snr_db: f64, seed: u64) -> Result<Vec<f64>> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidParam(format!("code rate {rate} outside (0, 1)")));
    }
    let var = noise_variance(rate, snr_db);
    let sigma = var.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            2.0 * (1.0 + sigma * z) / var
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_bit_errors: u64,
    pub max_frames: u64,
}

impl StopRule {
    fn validate(&self) -> Result<()> {
        if self.min_bit_errors == 0 || self.max_frames == 0 {
            return Err(Error::InvalidParam("stopping rule needs positive limits".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iterations: f64,
}

/// Seed of frame `frame` at `snr_db`; independent of the decoder, so two
/// decoders run with the same seed see the same noise.
pub fn frame_seed(seed: u64, snr_db: f64, frame: u64) -> u64 {
    derive(derive(seed, snr_db.to_bits()), frame)
}

/// Error rates of `decoder` at every SNR of `snr_list`.
///
/// Frames run in fixed batches of [`BATCH`] on the current rayon pool and
/// the stopping rule is checked between batches, so the counts do not
/// depend on the number of threads.
pub fn run_ber<D: FrameDecoder + ?Sized>(
    decoder: &D,
    snr_list: &[f64],
    stop: StopRule,
    seed: u64,
) -> Result<Vec<BerPoint>> {
    stop.validate()?;
    let h = decoder.code();
    let (n, rate) = (h.n_cols(), h.design_rate());
    snr_list
        .iter()
        .map(|&snr| {
            let (mut frames, mut bit_errors, mut frame_errors, mut iters) = (0u64, 0u64, 0u64, 0u64);
            while frames < stop.max_frames && bit_errors < stop.min_bit_errors {
                let batch = BATCH.min(stop.max_frames - frames);
                let results = (frames..frames + batch)
                    .into_par_iter()
                    .map(|f| {
                        let llr = awgn_llrs(n, rate, snr, frame_seed(seed, snr, f))?;
                        let out = decoder.decode_frame(&llr)?;
                        let errs = out.hard_bits.iter().filter(|&&b| b != 0).count() as u64;
                        Ok((errs, u64::from(out.iterations)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for (errs, it) in results {
                    bit_errors += errs;
                    frame_errors += u64::from(errs > 0);
                    iters += it;
                }
                frames += batch;
            }
            Ok(BerPoint {
                snr_db: snr,
                frames,
                bit_errors,
                frame_errors,
                ber: bit_errors as f64 / (frames * n as u64) as f64,
                fer: frame_errors as f64 / frames as f64,
                avg_iterations: iters as f64 / frames as f64,
            })
        })
        .collect()
}

/// Fixed-point layered min-sum error rates with the format in `params`.
pub fn run_ber_nms(
    h: &ParityCheckMatrix,
    params: &DecodeParams,
    snr_list: &[f64],
    stop: StopRule,
    seed: u64,
) -> Result<Vec<BerPoint>> {
    let dec = LayeredDecoder::new(h, FixedPoint::new(params.format, params.alpha)?, *params)?;
    run_ber(&dec, snr_list, stop, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantRow {
    pub format: QFormat,
    pub point: BerPoint,
}

/// Error rate per fixed-point format at one SNR, every format decoding the
/// same noise realizations.
pub fn quantization_sweep(
    h: &ParityCheckMatrix,
    formats: &[QFormat],
    snr_db: f64,
    params: &DecodeParams,
    stop: StopRule,
    seed: u64,
) -> Result<Vec<QuantRow>> {
    if formats.len() < 2 {
        return Err(Error::InvalidParam("a sweep needs at least two formats".into()));
    }
    formats
        .iter()
        .map(|&format| {
            let p = DecodeParams { format, ..*params };
            let mut pts = run_ber_nms(h, &p, &[snr_db], stop, seed)?;
            Ok(QuantRow {
                format,
                point: pts.remove(0),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRow {
    snr_db: f64,
    frames: u64,
    bit_errors: u64,
    ber: f64,
    fer: f64,
    avg_iters: f64,
}

/// CSV with columns `snr_db,frames,bit_errors,ber,fer,avg_iters`.
pub fn to_csv(points: &[BerPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(CsvRow {
            snr_db: p.snr_db,
            frames: p.frames,
            bit_errors: p.bit_errors,
            ber: p.ber,
            fer: p.fer,
            avg_iters: p.avg_iterations,
        })
        .map_err(|e| Error::InvalidParam(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Decoded throughput in Mb/s: `N · f_clk / (k_i · iterations)`.
pub fn throughput_mbps(n_bits: usize, f_clk_hz: f64, k_i: u64, iterations: f64) -> Result<f64> {
    if n_bits == 0 || f_clk_hz <= 0.0 || k_i == 0 || iterations <= 0.0 {
        return Err(Error::InvalidParam("throughput needs positive inputs".into()));
    }
    Ok(n_bits as f64 * f_clk_hz / (k_i as f64 * iterations) / 1e6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{standard::builtin, CodewordSpace};
    use crate::decoder::decode_layered_nms;

    fn stop(e: u64, f: u64) -> StopRule {
        StopRule { min_bit_errors: e, max_frames: f }
    }

    #[test]
    fn llr_mean_matches_moment() {
        let (rate, snr) = (0.5, 1.0);
        let var = noise_variance(rate, snr);
        let x = awgn_llrs(100_000, rate, snr, 9).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        // LLR ~ N(2/σ², 4/σ²)
        let se = (4.0 / var).sqrt() / (x.len() as f64).sqrt();
        assert!((mean - 2.0 / var).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn llrs_are_seeded() {
        assert_eq!(awgn_llrs(50, 0.5, 2.0, 4).unwrap(), awgn_llrs(50, 0.5, 2.0, 4).unwrap());
        assert_ne!(awgn_llrs(50, 0.5, 2.0, 4).unwrap(), awgn_llrs(50, 0.5, 2.0, 5).unwrap());
        assert!(awgn_llrs(5, 1.0, 2.0, 0).is_err());
    }

    #[test]
    fn high_snr_converges_at_once() {
        let h = builtin("wimax_576_r12").unwrap();
        let llr = awgn_llrs(h.n_cols(), 0.5, 30.0, 1).unwrap();
        assert!(llr.iter().all(|&v| v > 0.0));
        let r = decode_layered_nms(&h, &llr, &DecodeParams::default()).unwrap();
        assert!(r.converged && r.iterations_run == 1);
    }

    #[test]
    fn counts_do_not_depend_on_threads() {
        let h = builtin("wimax_576_r12").unwrap();
        let p = DecodeParams::default();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_ber_nms(&h, &p, &[1.5, 2.0], stop(50, 200), 3).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn ber_definition_and_bounds() {
        let h = builtin("wimax_576_r12").unwrap();
        let pts = run_ber_nms(&h, &DecodeParams::default(), &[1.0], stop(10_000, 100), 1).unwrap();
        let p = &pts[0];
        assert_eq!(p.ber, p.bit_errors as f64 / (p.frames as f64 * 576.0));
        assert!((0.0..=1.0).contains(&p.ber) && p.avg_iterations <= 10.0);
        assert!(p.frame_errors <= p.frames);
    }

    #[test]
    fn sweep_is_paired_and_repeatable() {
        let h = builtin("wimax_576_r12").unwrap();
        let f = QFormat::DEFAULT;
        let rows = quantization_sweep(&h, &[f, f], 1.5, &DecodeParams::default(), stop(30, 128), 2).unwrap();
        assert_eq!(rows[0].point, rows[1].point);
        assert!(quantization_sweep(&h, &[f], 1.5, &DecodeParams::default(), stop(1, 1), 2).is_err());
    }

    #[test]
    fn early_stop_does_not_change_errors() {
        let h = builtin("wimax_576_r12").unwrap();
        let on = DecodeParams::default();
        let off = DecodeParams { early_stop: false, ..on };
        let a = run_ber_nms(&h, &on, &[2.0], stop(u64::MAX, 128), 8).unwrap();
        let b = run_ber_nms(&h, &off, &[2.0], stop(u64::MAX, 128), 8).unwrap();
        assert_eq!(a[0].bit_errors, b[0].bit_errors);
        assert!(a[0].avg_iterations < 10.0 && b[0].avg_iterations == 10.0);
    }

    fn flip(llr: &[f64], c: &[u8]) -> Vec<f64> {
        llr.iter().zip(c).map(|(&l, &b)| if b == 1 { -l } else { l }).collect()
    }

    #[test]
    fn codeword_sign_flip_flips_decisions() {
        // flipping the LLR signs on the support of a codeword is the channel
        // image of transmitting that codeword; a symmetric decoder answers
        // with the same decisions XOR the codeword
        let h = builtin("wimax_576_r12").unwrap();
        let space = CodewordSpace::new(&h);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = DecodeParams::default();
        let dec = crate::FloatLayeredDecoder::new(&h, crate::decoder::FloatingPoint::new(1.15).unwrap(), p).unwrap();
        for f in 0..100 {
            let llr = awgn_llrs(h.n_cols(), 0.5, 1.5, f).unwrap();
            let c = space.sample(&mut rng);
            let a = dec.decode(&llr).unwrap();
            let b = dec.decode(&flip(&llr, &c)).unwrap();
            let expect: Vec<u8> = a.hard_bits.iter().zip(&c).map(|(x, y)| x ^ y).collect();
            assert_eq!(b.hard_bits, expect, "frame {f}");
            assert_eq!(a.iterations_run, b.iterations_run);
        }
    }

    #[test]
    fn fixed_point_is_nearly_symmetric() {
        // zero counts as positive and the range is [-2^(n-1), 2^(n-1) - 1],
        // so symmetry only holds up to rare ties
        let h = builtin("wimax_576_r12").unwrap();
        let space = CodewordSpace::new(&h);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = DecodeParams::default();
        let mut differing = 0;
        for f in 0..100 {
            let llr = awgn_llrs(h.n_cols(), 0.5, 1.5, f).unwrap();
            let c = space.sample(&mut rng);
            let a = decode_layered_nms(&h, &llr, &p).unwrap();
            let b = decode_layered_nms(&h, &flip(&llr, &c), &p).unwrap();
            differing += a.hard_bits.iter().zip(&b.hard_bits).zip(&c).filter(|((x, y), z)| *x ^ *y != **z).count();
        }
        assert!(differing * 100 < 100 * 576, "{differing} bits");
    }

    #[test]
    fn csv_layout() {
        let p = BerPoint {
            snr_db: 2.0,
            frames: 10,
            bit_errors: 3,
            frame_errors: 1,
            ber: 0.5,
            fer: 0.1,
            avg_iterations: 4.0,
        };
        let text = to_csv(&[p]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("snr_db,frames,bit_errors,ber,fer,avg_iters"));
        assert_eq!(lines.next(), Some("2.0,10,3,0.5,0.1,4.0"));
    }

    #[test]
    fn throughput_formula() {
        let t = throughput_mbps(2304, 300e6, 843, 10.0).unwrap();
        assert!((t - 82.0).abs() < 0.05, "{t}");
        let half = throughput_mbps(2304, 300e6, 843, 5.0).unwrap();
        assert!((half - 2.0 * t).abs() < 1e-9);
        let slow = throughput_mbps(2304, 300e6, 1686, 10.0).unwrap();
        assert!((slow - t / 2.0).abs() < 1e-9);
        assert!(throughput_mbps(2304, 300e6, 0, 10.0).is_err());
    }
}
