//! Group-averaged channels: averaging a unitary representation over the
//! uniform (Haar) measure gives an idempotent projection channel, and
//! convolution powers of any full-support measure converge to it.

use ultrachan::channel::QuantumChannel;
use ultrachan::group::{FiniteGroup, GroupMeasure, UnitaryRepresentation};

fn main() {
    let group = FiniteGroup::cyclic(4);
    let rep = UnitaryRepresentation::cyclic_phases(group.clone(), &[0, 1, 2, 3], None).unwrap();
    let haar = GroupMeasure::haar_uniform(group.clone());

    let averaged = QuantumChannel::group_average(&rep, &haar).unwrap();
    let twice = averaged.compose(&averaged).unwrap();
    println!("‖Φ̄∘Φ̄ − Φ̄‖ = {:.3e}  (idempotence)", averaged.distance(&twice).unwrap());

    // A lopsided measure with full support: μ*ⁿ → Haar in total variation,
    // so the averaged channels converge to the Haar average.
    let mu = GroupMeasure::new(group.clone(), vec![0.55, 0.25, 0.15, 0.05]).unwrap();
    println!("\n  n   ‖μ*ⁿ − haar‖_tv   ‖Φ_{{μ*ⁿ}} − Φ̄‖");
    for n in [1usize, 2, 4, 8, 16, 32] {
        let mun = mu.convolution_power(n);
        let phin = QuantumChannel::group_average(&rep, &mun).unwrap();
        println!(
            "{n:>3}   {:>13.3e}   {:>13.3e}",
            mun.total_variation(&haar).unwrap(),
            phin.distance(&averaged).unwrap()
        );
    }

    // The same story on a non-abelian group.
    let s3 = FiniteGroup::symmetric_3();
    let rep3 = UnitaryRepresentation::s3_standard(s3.clone()).unwrap();
    let haar3 = GroupMeasure::haar_uniform(s3.clone());
    let avg3 = QuantumChannel::group_average(&rep3, &haar3).unwrap();
    let avg3_sq = avg3.compose(&avg3).unwrap();
    println!("\nS₃ standard rep: ‖Φ̄² − Φ̄‖ = {:.3e}", avg3.distance(&avg3_sq).unwrap());
}
