use num_complex::Complex64;

use super::operators::{spin_operators, Spin, SpinOperators};
use crate::error::{Error, Result};
use crate::linalg::{identity, kron_all, CMatrix};

/// Zeeman conversion γ = μ_B/h in GHz per tesla.
pub const ZEEMAN_GHZ_PER_TESLA: f64 = 13.9962;

/// Largest Hilbert dimension assembled densely unless overridden.
pub const DEFAULT_MAX_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GFactor {
    Isotropic(f64),
    Diagonal([f64; 3]),
}

impl GFactor {
    pub fn components(&self) -> [f64; 3] {
        match *self {
            GFactor::Isotropic(g) => [g, g, g],
            GFactor::Diagonal(g) => g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuclearSpin {
    pub spin: Spin,
    /// Isotropic hyperfine constant A, GHz.
    pub a_ghz: f64,
    /// Quadrupole constant p, GHz.
    pub p_ghz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSite {
    pub spin: Spin,
    pub g: GFactor,
    pub d_ghz: f64,
    pub e_ghz: f64,
    pub nuclear: Option<NuclearSpin>,
}

impl SpinSite {
    pub fn new(spin: Spin, g: f64) -> Self {
        SpinSite {
            spin,
            g: GFactor::Isotropic(g),
            d_ghz: 0.0,
            e_ghz: 0.0,
            nuclear: None,
        }
    }

    pub fn with_anisotropy(mut self, d_ghz: f64, e_ghz: f64) -> Self {
        self.d_ghz = d_ghz;
        self.e_ghz = e_ghz;
        self
    }

    pub fn with_nuclear(mut self, spin: Spin, a_ghz: f64, p_ghz: f64) -> Self {
        self.nuclear = Some(NuclearSpin { spin, a_ghz, p_ghz });
        self
    }

    pub fn electronic_dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn nuclear_dim(&self) -> usize {
        self.nuclear.map_or(1, |n| n.spin.dim())
    }

    pub fn dim(&self) -> usize {
        self.electronic_dim() * self.nuclear_dim()
    }
}

/// Isotropic exchange J S_i·S_j between the electronic spins of two sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub j_ghz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystemSpec {
    pub sites: Vec<SpinSite>,
    pub couplings: Vec<Coupling>,
    pub field_tesla: [f64; 3],
}

impl SpinSystemSpec {
    pub fn single(site: SpinSite, field_tesla: [f64; 3]) -> Self {
        SpinSystemSpec {
            sites: vec![site],
            couplings: Vec::new(),
            field_tesla,
        }
    }

    pub fn with_field(&self, field_tesla: [f64; 3]) -> Self {
        SpinSystemSpec {
            field_tesla,
            ..self.clone()
        }
    }

    pub fn site_dims(&self) -> Vec<usize> {
        self.sites.iter().map(SpinSite::dim).collect()
    }

    /// Product of site dimensions; saturates instead of overflowing.
    pub fn dim(&self) -> usize {
        self.sites
            .iter()
            .fold(1usize, |acc, s| acc.saturating_mul(s.dim()))
    }

    /// All violated invariants, each naming the offending site or coupling.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.sites.is_empty() {
            out.push("system has no sites".to_string());
        }
        if self.field_tesla.iter().any(|b| !b.is_finite()) {
            out.push("field_tesla must be finite".to_string());
        }
        for (k, site) in self.sites.iter().enumerate() {
            if site.spin.twice() == 0 {
                out.push(format!("site {k}: spin must be at least 1/2"));
            }
            let (d, e) = (site.d_ghz, site.e_ghz);
            let g = site.g.components();
            let mut numbers = vec![d, e, g[0], g[1], g[2]];
            if let Some(n) = site.nuclear {
                numbers.extend([n.a_ghz, n.p_ghz]);
            }
            if numbers.iter().any(|x| !x.is_finite()) {
                out.push(format!("site {k}: parameters must be finite"));
            }
            if d != 0.0 && e != 0.0 && e.abs() > d.abs() / 3.0 * (1.0 + 1e-12) {
                out.push(format!(
                    "site {k}: rhombicity violation |E| = {} > |D|/3 = {}",
                    e.abs(),
                    d.abs() / 3.0
                ));
            }
        }
        for (k, c) in self.couplings.iter().enumerate() {
            let n = self.sites.len();
            if c.i >= n || c.j >= n {
                out.push(format!(
                    "coupling {k}: site index out of range ({}, {}) for {n} sites",
                    c.i, c.j
                ));
            } else if c.i == c.j {
                out.push(format!("coupling {k}: indices must be distinct (both {})", c.i));
            }
            if !c.j_ghz.is_finite() {
                out.push(format!("coupling {k}: J_ghz must be finite"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(v))
        }
    }

    fn site_checked(&self, site: usize) -> Result<&SpinSite> {
        self.sites.get(site).ok_or(Error::SiteIndex {
            index: site,
            sites: self.sites.len(),
        })
    }

    /// Electronic spin component of one site, embedded in the full space.
    pub fn electronic_operator(&self, site: usize, axis: Axis) -> Result<CMatrix> {
        let s = self.site_checked(site)?;
        let ops = spin_operators(s.spin);
        let local = kron_all([pick(&ops, axis), &identity(s.nuclear_dim())]);
        embed_operator(&local, site, self)
    }

    /// Nuclear spin component of one site, embedded in the full space.
    pub fn nuclear_operator(&self, site: usize, axis: Axis) -> Result<CMatrix> {
        let s = self.site_checked(site)?;
        let n = s.nuclear.ok_or_else(|| {
            Error::contract("spin-core", format!("site {site} carries no nuclear spin"))
        })?;
        let ops = spin_operators(n.spin);
        let local = kron_all([&identity(s.electronic_dim()), pick(&ops, axis)]);
        embed_operator(&local, site, self)
    }

    /// Sum of the electronic spin components over all sites.
    pub fn total_electronic(&self, axis: Axis) -> Result<CMatrix> {
        let mut total = CMatrix::zeros(self.dim(), self.dim());
        for k in 0..self.sites.len() {
            total += self.electronic_operator(k, axis)?;
        }
        Ok(total)
    }

    /// Total angular momentum component, electronic plus nuclear.
    pub fn total_spin(&self, axis: Axis) -> Result<CMatrix> {
        let mut total = self.total_electronic(axis)?;
        for (k, s) in self.sites.iter().enumerate() {
            if s.nuclear.is_some() {
                total += self.nuclear_operator(k, axis)?;
            }
        }
        Ok(total)
    }
}

fn pick(ops: &SpinOperators, axis: Axis) -> &CMatrix {
    match axis {
        Axis::X => &ops.sx,
        Axis::Y => &ops.sy,
        Axis::Z => &ops.sz,
    }
}

/// identity ⊗ … ⊗ op ⊗ … ⊗ identity, in the spec's site order.
pub fn embed_operator(op: &CMatrix, site_index: usize, spec: &SpinSystemSpec) -> Result<CMatrix> {
    let dims = spec.site_dims();
    let site_dim = *dims.get(site_index).ok_or(Error::SiteIndex {
        index: site_index,
        sites: dims.len(),
    })?;
    if op.nrows() != site_dim || op.ncols() != site_dim {
        return Err(Error::DimensionMismatch {
            module: "spin-core",
            expected: site_dim,
            got: op.nrows(),
        });
    }
    let before: usize = dims[..site_index].iter().product();
    let after: usize = dims[site_index + 1..].iter().product();
    Ok(kron_all([&identity(before), op, &identity(after)]))
}

pub fn build_hamiltonian(spec: &SpinSystemSpec) -> Result<CMatrix> {
    build_hamiltonian_with_limit(spec, DEFAULT_MAX_DIM)
}

/// H = Σ_sites [γ g B·S + D S_z² + E(S_x² − S_y²) + A S·I + p I_z²] + Σ J S_i·S_j, in GHz.
pub fn build_hamiltonian_with_limit(spec: &SpinSystemSpec, max_dim: usize) -> Result<CMatrix> {
    spec.validate()?;
    let dim = spec.dim();
    if dim > max_dim {
        return Err(Error::DimensionOverflow { dim, max: max_dim });
    }
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut h = CMatrix::zeros(dim, dim);
    let b = spec.field_tesla;
    for (k, site) in spec.sites.iter().enumerate() {
        let e = spin_operators(site.spin);
        let nd = site.nuclear_dim();
        let id_n = identity(nd);
        let id_e = identity(site.electronic_dim());
        let g = site.g.components();
        let mut local = (&e.sx * re(g[0] * b[0]) + &e.sy * re(g[1] * b[1]) + &e.sz * re(g[2] * b[2]))
            * re(ZEEMAN_GHZ_PER_TESLA);
        local += &e.sz * &e.sz * re(site.d_ghz);
        local += (&e.sx * &e.sx - &e.sy * &e.sy) * re(site.e_ghz);
        let mut local = kron_all([&local, &id_n]);
        if let Some(n) = site.nuclear {
            let i = spin_operators(n.spin);
            let sdi = kron_all([&e.sx, &i.sx]) + kron_all([&e.sy, &i.sy]) + kron_all([&e.sz, &i.sz]);
            local += sdi * re(n.a_ghz);
            local += kron_all([&id_e, &(&i.sz * &i.sz)]) * re(n.p_ghz);
        }
        h += embed_operator(&local, k, spec)?;
    }
    for c in &spec.couplings {
        let mut sdots = CMatrix::zeros(dim, dim);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            sdots += spec.electronic_operator(c.i, axis)? * spec.electronic_operator(c.j, axis)?;
        }
        h += sdots * re(c.j_ghz);
    }
    Ok(crate::linalg::hermitian_part(&h))
}
