//! Cesàro averaging of a single unitary channel: the time averages
//! (1/N)Σ Φᵏ converge to a projection channel. For a phase unitary the
//! limit is the dephasing channel that kills off-diagonal entries.

use num_complex::Complex64;
use ultrachan::channel::{cesaro_limit, QuantumChannel};
use ultrachan::operator::CMatrix;

fn main() {
    // U = diag(1, i): eigenphases differ, so the fixed-point space of
    // Φ = U·U* is spanned by the diagonal matrix units.
    let u = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
        ],
    );
    let phi = QuantumChannel::unitary(u).unwrap();

    let (limit, diag) = cesaro_limit(&phi, 1e-10, 1 << 40).unwrap();
    println!("effective horizon: {} terms", diag.effective_horizon);
    println!("residual trail: {:?}", diag.residuals.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>());

    // The limit dephases: a coherent |+⟩⟨+| state loses its off-diagonals.
    let plus = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
        ],
    );
    let out = limit.apply_matrix(&plus);
    println!("\nΦ∞(|+⟩⟨+|) =");
    for i in 0..2 {
        println!(
            "  [{:+.4}{:+.4}i  {:+.4}{:+.4}i]",
            out[(i, 0)].re,
            out[(i, 0)].im,
            out[(i, 1)].re,
            out[(i, 1)].im
        );
    }

    // Projection laws of the limit.
    println!("\n‖Φ∞∘Φ − Φ∞‖ = {:.2e}", limit.compose(&phi).unwrap().distance(&limit).unwrap());
    println!("‖Φ∘Φ∞ − Φ∞‖ = {:.2e}", phi.compose(&limit).unwrap().distance(&limit).unwrap());
    println!("‖Φ∞² − Φ∞‖  = {:.2e}", limit.compose(&limit).unwrap().distance(&limit).unwrap());
}
