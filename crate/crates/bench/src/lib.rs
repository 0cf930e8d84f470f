//! Fixtures shared by the criterion benchmarks in `benches/`.

use sandmold_core::evolution::{EvolutionState, Model};
use sandmold_core::geometry::{shapes, ConvexFront, Point2};

/// Marker counts the kernels are timed at.
pub const SIZES: [usize; 3] = [64, 256, 1024];

pub fn disk(n: usize) -> ConvexFront {
    shapes::disk(Point2::new(0.0, 0.0), 1.0, n).expect("valid disk")
}

/// Rounded square of side 2 whose fillets span several marker spacings.
pub fn rounded_square(n: usize) -> ConvexFront {
    shapes::rounded_square(Point2::new(0.0, 0.0), 2.0, 0.4, n).expect("valid rounded square")
}

pub fn sandpile_state(front: ConvexFront) -> EvolutionState {
    EvolutionState::with_velocities(1.0, vec![front], Model::Sandpile1).expect("convex front")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        for n in SIZES {
            assert_eq!(sandpile_state(rounded_square(n)).fronts[0].len(), n);
            assert_eq!(disk(n).len(), n);
        }
    }
}
