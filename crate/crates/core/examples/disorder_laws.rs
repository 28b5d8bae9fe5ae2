use pinning::disorder::{left_tail_fit, sample_disorder, DisorderKind, DisorderLaw};
use pinning::rng::SeedRecord;
use pinning::stats::summarize;

fn main() -> pinning::Result<()> {
    let laws = [
        DisorderLaw::gaussian(),
        DisorderLaw::rademacher(),
        DisorderLaw::new(DisorderKind::BoundedUniform)?,
        DisorderLaw::new(DisorderKind::GammaExp(1.5))?,
    ];
    for law in &laws {
        let w = sample_disorder(law, 200_000, SeedRecord::new(3, 0));
        let s = summarize(&w.omega);
        let tilt: Vec<f64> = w
            .omega
            .iter()
            .map(|x| (0.5 * x - law.lambda(0.5).unwrap()).exp())
            .collect();
        let t = summarize(&tilt);
        println!(
            "{:<14} mean {:+.4} sd {:.4}  Lambda(0.5) = {:.5}  E[tilt] = {:.4} ± {:.4}",
            law.key(),
            s.mean,
            s.sd,
            law.lambda(0.5)?,
            t.mean,
            t.stderr
        );
    }
    // negated Weibull(2) samples have a left tail exp(-x^2)
    let g = sample_disorder(&DisorderLaw::gaussian(), 20_000, SeedRecord::new(4, 0));
    let weib: Vec<f64> = g
        .omega
        .chunks(2)
        .map(|p| -(p[0] * p[0] + p[1] * p[1]).sqrt() / 2f64.sqrt())
        .collect();
    let pad: Vec<f64> = weib.iter().chain(&weib).copied().collect();
    let fit = left_tail_fit(&pad)?;
    println!(
        "Weibull(2) left tail: gamma_hat = {:.3} ({:.3}, {:.3})",
        fit.gamma_hat, fit.gamma_ci.0, fit.gamma_ci.1
    );
    Ok(())
}
