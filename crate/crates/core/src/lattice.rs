//! Square-lattice geometry.
//!
//! Site `(x, y)` has index `y L + x`. Bonds are listed site by site in index
//! order: first the bond to the right neighbour, then the bond to the
//! neighbour below. With periodic boundaries an `L = 2` lattice therefore has
//! two distinct bonds between each neighbouring pair, giving `2L²` bonds in
//! every periodic case.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    /// `true` for `(x, y)–(x+1, y)`, `false` for `(x, y)–(x, y+1)`.
    pub horizontal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LatticeSpec {
    pub l: usize,
    pub periodic: bool,
    pub bonds: Vec<Bond>,
}

/// Largest supported side length.
pub const MAX_L: usize = 256;

impl LatticeSpec {
    pub fn new(l: usize, periodic: bool) -> Result<Self> {
        if !(2..=MAX_L).contains(&l) {
            return Err(Error::InvalidParameter {
                name: "L",
                value: l as f64,
                constraint: "2 <= L <= 256",
            });
        }
        let mut bonds = Vec::with_capacity(2 * l * l);
        for y in 0..l {
            for x in 0..l {
                let s = y * l + x;
                if x + 1 < l {
                    bonds.push(Bond { a: s, b: s + 1, horizontal: true });
                } else if periodic {
                    bonds.push(Bond { a: s, b: y * l, horizontal: true });
                }
                if y + 1 < l {
                    bonds.push(Bond { a: s, b: s + l, horizontal: false });
                } else if periodic {
                    bonds.push(Bond { a: s, b: x, horizontal: false });
                }
            }
        }
        Ok(Self { l, periodic, bonds })
    }

    pub fn n_sites(&self) -> usize {
        self.l * self.l
    }

    pub fn n_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.l, site / self.l)
    }

    pub fn site(&self, x: usize, y: usize) -> usize {
        (y % self.l) * self.l + (x % self.l)
    }

    pub fn bond_pairs(&self) -> Vec<(usize, usize)> {
        self.bonds.iter().map(|b| (b.a, b.b)).collect()
    }

    /// For each site, `(neighbour, bond index)` pairs.
    pub fn neighbours(&self) -> Vec<Vec<(usize, usize)>> {
        let mut nb = vec![Vec::with_capacity(4); self.n_sites()];
        for (k, b) in self.bonds.iter().enumerate() {
            nb[b.a].push((b.b, k));
            nb[b.b].push((b.a, k));
        }
        nb
    }

    /// Number of dual plaquette spins. Open lattices have `(L−1)²` interior
    /// plaquettes; the outer face is held fixed.
    pub fn n_plaquettes(&self) -> usize {
        if self.periodic {
            self.l * self.l
        } else {
            (self.l - 1) * (self.l - 1)
        }
    }

    fn plaquette(&self, x: isize, y: isize) -> Option<usize> {
        let l = self.l as isize;
        if self.periodic {
            Some((y.rem_euclid(l) * l + x.rem_euclid(l)) as usize)
        } else if (0..l - 1).contains(&x) && (0..l - 1).contains(&y) {
            Some((y * (l - 1) + x) as usize)
        } else {
            None
        }
    }

    /// The two faces adjacent to each bond; `None` is the fixed outer face.
    /// Plaquette `(x, y)` has corners `(x, y)` and `(x+1, y+1)`.
    pub fn dual_faces(&self) -> Vec<(Option<usize>, Option<usize>)> {
        self.bonds
            .iter()
            .map(|b| {
                let (x, y) = self.coords(b.a);
                let (x, y) = (x as isize, y as isize);
                if b.horizontal {
                    (self.plaquette(x, y), self.plaquette(x, y - 1))
                } else {
                    (self.plaquette(x, y), self.plaquette(x - 1, y))
                }
            })
            .collect()
    }

    /// Bonds of the two non-contractible loops of the torus (empty when open):
    /// all horizontal bonds in row 0, and all vertical bonds in column 0.
    pub fn torus_loops(&self) -> [Vec<usize>; 2] {
        if !self.periodic {
            return [Vec::new(), Vec::new()];
        }
        let mut row = Vec::new();
        let mut col = Vec::new();
        for (k, b) in self.bonds.iter().enumerate() {
            let (x, y) = self.coords(b.a);
            if b.horizontal && y == 0 {
                row.push(k);
            }
            if !b.horizontal && x == 0 {
                col.push(k);
            }
        }
        [row, col]
    }

    /// A shortest lattice path from `i` to `j` as a list of bond indices,
    /// moving along x first, then y.
    pub fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let l = self.l;
        let find = |a: usize, b: usize| {
            self.bonds
                .iter()
                .position(|bd| (bd.a == a && bd.b == b) || (bd.a == b && bd.b == a))
                .expect("neighbours share a bond")
        };
        let step = |from: usize, to: usize, periodic: bool| -> isize {
            let d = to as isize - from as isize;
            if periodic && d.unsigned_abs() > l / 2 {
                if d > 0 { -1 } else { 1 }
            } else {
                d.signum()
            }
        };
        let (mut x, mut y) = self.coords(i);
        let (tx, ty) = self.coords(j);
        let mut out = Vec::new();
        while x != tx {
            let nx = (x as isize + step(x, tx, self.periodic)).rem_euclid(l as isize) as usize;
            out.push(find(self.site(x, y), self.site(nx, y)));
            x = nx;
        }
        while y != ty {
            let ny = (y as isize + step(y, ty, self.periodic)).rem_euclid(l as isize) as usize;
            out.push(find(self.site(x, y), self.site(x, ny)));
            y = ny;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_counts() {
        for l in 2..6 {
            assert_eq!(LatticeSpec::new(l, true).unwrap().n_bonds(), 2 * l * l);
            assert_eq!(LatticeSpec::new(l, false).unwrap().n_bonds(), 2 * l * (l - 1));
        }
        assert!(LatticeSpec::new(1, true).is_err());
    }

    #[test]
    fn every_site_has_four_neighbour_slots_when_periodic() {
        let lat = LatticeSpec::new(3, true).unwrap();
        assert!(lat.neighbours().iter().all(|n| n.len() == 4));
    }

    #[test]
    fn each_interior_plaquette_has_four_bonds() {
        for periodic in [false, true] {
            let lat = LatticeSpec::new(4, periodic).unwrap();
            let mut count = vec![0; lat.n_plaquettes()];
            for (a, b) in lat.dual_faces() {
                for f in [a, b].into_iter().flatten() {
                    count[f] += 1;
                }
            }
            assert!(count.iter().all(|&c| c == 4));
        }
    }

    #[test]
    fn paths_connect_endpoints() {
        let lat = LatticeSpec::new(4, true).unwrap();
        for (i, j) in [(0, 5), (0, 3), (15, 0), (6, 6)] {
            let mut odd = vec![0u8; lat.n_sites()];
            for k in lat.path(i, j) {
                odd[lat.bonds[k].a] ^= 1;
                odd[lat.bonds[k].b] ^= 1;
            }
            for (s, &o) in odd.iter().enumerate() {
                assert_eq!(o == 1, (s == i || s == j) && i != j);
            }
        }
        // 0 -> 3 wraps around in one step on L = 4
        assert_eq!(lat.path(0, 3).len(), 1);
    }
}
