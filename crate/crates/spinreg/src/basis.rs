//! The 16-state product basis of the register chain `|n2 e2 e1 n1>`.
//!
//! The encoding is normative for the whole crate:
//!
//! ```text
//! index = 8*n2 + 4*e2 + 2*e1 + n1,   up = 0, down = 1
//! ```
//!
//! so `|0> = |up2 Up2 Up1 up1>` and `|15> = |dn2 Dn2 Dn1 dn1>` (capitals
//! are electrons, lowercase are nuclei). Interactions exist only between
//! neighbors in the chain: n2-e2 (hyperfine), e2-e1 (exchange), e1-n1
//! (hyperfine).

/// Orientation of a single spin-1/2 along the permanent field axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Up,
    Down,
}

impl Orientation {
    /// Basis bit: up = 0, down = 1.
    pub fn bit(self) -> usize {
        match self {
            Orientation::Up => 0,
            Orientation::Down => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Self {
        if bit & 1 == 0 {
            Orientation::Up
        } else {
            Orientation::Down
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Up => Orientation::Down,
            Orientation::Down => Orientation::Up,
        }
    }

    /// z projection in units of hbar: +1/2 for up, -1/2 for down.
    pub fn z_projection(self) -> f64 {
        match self {
            Orientation::Up => 0.5,
            Orientation::Down => -0.5,
        }
    }
}

/// One of the four spins of the chain, ordered `n2 e2 e1 n1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinId {
    N2,
    E2,
    E1,
    N1,
}

impl SpinId {
    pub const ALL: [SpinId; 4] = [SpinId::N2, SpinId::E2, SpinId::E1, SpinId::N1];

    /// Bit position in the basis index (n1 is the least significant bit).
    pub fn bit_position(self) -> usize {
        match self {
            SpinId::N2 => 3,
            SpinId::E2 => 2,
            SpinId::E1 => 1,
            SpinId::N1 => 0,
        }
    }

    pub fn is_electron(self) -> bool {
        matches!(self, SpinId::E1 | SpinId::E2)
    }

    /// The electron of the same atom (identity for electrons).
    pub fn same_atom_electron(self) -> SpinId {
        match self {
            SpinId::N1 => SpinId::E1,
            SpinId::N2 => SpinId::E2,
            e => e,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinId::N2 => "n2",
            SpinId::E2 => "e2",
            SpinId::E1 => "e1",
            SpinId::N1 => "n1",
        }
    }
}

/// Index of a product basis state, 0..15.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(pub usize);

/// Number of basis states.
pub const DIM: usize = 16;

/// Bit mask selecting the two electron bits (e2, e1).
pub const ELECTRON_MASK: usize = 0b0110;

impl BasisIndex {
    /// Encodes the four spin labels into the basis index.
    pub fn from_labels(
        n2: Orientation,
        e2: Orientation,
        e1: Orientation,
        n1: Orientation,
    ) -> Self {
        BasisIndex(8 * n2.bit() + 4 * e2.bit() + 2 * e1.bit() + n1.bit())
    }

    /// Decodes back into `(n2, e2, e1, n1)`.
    pub fn labels(self) -> (Orientation, Orientation, Orientation, Orientation) {
        (
            Orientation::from_bit(self.0 >> 3),
            Orientation::from_bit(self.0 >> 2),
            Orientation::from_bit(self.0 >> 1),
            Orientation::from_bit(self.0),
        )
    }

    pub fn label_of(self, spin: SpinId) -> Orientation {
        Orientation::from_bit(self.0 >> spin.bit_position())
    }

    /// The state with `spin` flipped and everything else unchanged.
    pub fn with_flipped(self, spin: SpinId) -> Self {
        BasisIndex(self.0 ^ (1 << spin.bit_position()))
    }

    pub fn with_label(self, spin: SpinId, label: Orientation) -> Self {
        let mask = 1 << spin.bit_position();
        BasisIndex((self.0 & !mask) | (label.bit() * mask))
    }

    /// True if any electron points up.
    pub fn has_electron_up(self) -> bool {
        self.0 & ELECTRON_MASK != ELECTRON_MASK
    }

    /// The state with both electrons down and the same nuclear labels.
    pub fn electrons_down(self) -> Self {
        BasisIndex(self.0 | ELECTRON_MASK)
    }

    /// Exchanges the two atoms: `(n2 e2 e1 n1) -> (n1 e1 e2 n2)`,
    /// a 4-bit reversal of the index.
    pub fn atom_swapped(self) -> Self {
        let i = self.0;
        BasisIndex(((i & 1) << 3) | ((i & 2) << 1) | ((i & 4) >> 1) | ((i & 8) >> 3))
    }
}

/// Total z projection `Sigma` of a basis state: the sum of the four
/// `+-1/2` projections, i.e. `2 - popcount(index)`.
///
/// `Sigma` partitions the basis into sectors of sizes 1, 4, 6, 4, 1 for
/// `Sigma = +2, +1, 0, -1, -2`; the static Hamiltonian is block-diagonal
/// across them and an RF photon changes `Sigma` by one.
pub fn sigma_of(i: BasisIndex) -> i32 {
    2 - (i.0.count_ones() as i32)
}

/// Basis indices of the sector with the given `Sigma`, ascending.
pub fn sector(sigma: i32) -> Vec<BasisIndex> {
    (0..DIM)
        .map(BasisIndex)
        .filter(|&i| sigma_of(i) == sigma)
        .collect()
}

/// All sector values, from `Sigma = +2` down to `-2`.
pub const SIGMA_VALUES: [i32; 5] = [2, 1, 0, -1, -2];

#[cfg(test)]
mod tests {
    use super::*;
    use Orientation::{Down, Up};

    #[test]
    fn encoding_reproduces_labeled_kets() {
        // (n2, e2, e1, n1) -> index
        assert_eq!(BasisIndex::from_labels(Up, Up, Up, Up), BasisIndex(0));
        assert_eq!(BasisIndex::from_labels(Up, Down, Down, Down), BasisIndex(7));
        assert_eq!(
            BasisIndex::from_labels(Down, Down, Down, Down),
            BasisIndex(15)
        );
        // Sigma = -1 quartet
        assert_eq!(
            BasisIndex::from_labels(Down, Down, Up, Down),
            BasisIndex(13)
        );
        assert_eq!(
            BasisIndex::from_labels(Down, Up, Down, Down),
            BasisIndex(11)
        );
        assert_eq!(
            BasisIndex::from_labels(Down, Down, Down, Up),
            BasisIndex(14)
        );
        // Sigma = +1 quartet
        assert_eq!(BasisIndex::from_labels(Up, Up, Down, Up), BasisIndex(2));
        assert_eq!(BasisIndex::from_labels(Up, Down, Up, Up), BasisIndex(4));
        assert_eq!(BasisIndex::from_labels(Up, Up, Up, Down), BasisIndex(1));
        assert_eq!(BasisIndex::from_labels(Down, Up, Up, Up), BasisIndex(8));
        // Sigma = 0 inner quartet
        assert_eq!(BasisIndex::from_labels(Up, Up, Down, Down), BasisIndex(3));
        assert_eq!(BasisIndex::from_labels(Up, Down, Up, Down), BasisIndex(5));
        assert_eq!(BasisIndex::from_labels(Down, Up, Down, Up), BasisIndex(10));
        assert_eq!(BasisIndex::from_labels(Down, Down, Up, Up), BasisIndex(12));
    }

    #[test]
    fn encode_decode_roundtrip() {
        for i in 0..DIM {
            let (n2, e2, e1, n1) = BasisIndex(i).labels();
            assert_eq!(BasisIndex::from_labels(n2, e2, e1, n1), BasisIndex(i));
        }
    }

    #[test]
    fn sigma_values_and_sector_sizes() {
        assert_eq!(sigma_of(BasisIndex(0)), 2);
        assert_eq!(sigma_of(BasisIndex(7)), -1);
        assert_eq!(sigma_of(BasisIndex(3)), 0);
        assert_eq!(sigma_of(BasisIndex(15)), -2);
        let sizes: Vec<usize> = SIGMA_VALUES.iter().map(|&s| sector(s).len()).collect();
        assert_eq!(sizes, vec![1, 4, 6, 4, 1]);
        // Sigma is the sum of the four z projections.
        for i in 0..DIM {
            let (n2, e2, e1, n1) = BasisIndex(i).labels();
            let total =
                n2.z_projection() + e2.z_projection() + e1.z_projection() + n1.z_projection();
            assert_eq!(sigma_of(BasisIndex(i)) as f64, total);
        }
    }

    #[test]
    fn electron_relaxation_target() {
        assert_eq!(BasisIndex(0).electrons_down(), BasisIndex(6));
        assert_eq!(BasisIndex(5).electrons_down(), BasisIndex(7));
        assert!(!BasisIndex(7).has_electron_up());
        assert!(BasisIndex(5).has_electron_up());
    }

    #[test]
    fn atom_swap_is_an_involution() {
        for i in 0..DIM {
            let swapped = BasisIndex(i).atom_swapped();
            assert_eq!(swapped.atom_swapped(), BasisIndex(i));
        }
        // |up2 Dn2 Dn1 dn1> = |7>  <->  |dn2 Dn2 Dn1 up1> = |14>
        assert_eq!(BasisIndex(7).atom_swapped(), BasisIndex(14));
        assert_eq!(BasisIndex(13).atom_swapped(), BasisIndex(11));
    }
}
