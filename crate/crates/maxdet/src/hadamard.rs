//! Hadamard matrix constructions and the registry of attainable orders.

use std::collections::BTreeMap;
use std::fmt;

use crate::{Error, Result};

/// Dense matrix with entries in {−1, 0, +1}, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i8) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                assert!((-1..=1).contains(&v), "sign matrix entry out of range");
                entries.push(v);
            }
        }
        SignMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i8) {
        assert!((-1..=1).contains(&v));
        self.entries[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> SignMatrix {
        SignMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Integer product of two sign matrices (entries fit in i64 for all
    /// orders this crate handles).
    pub fn int_product(&self, other: &SignMatrix) -> Vec<i64> {
        assert_eq!(self.cols, other.rows);
        let mut out = vec![0i64; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as i64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[i * other.cols + j] += a * other.get(k, j) as i64;
                }
            }
        }
        out
    }

    /// Serialize as "rows cols" then '+'/'-' rows. Fails on zero entries.
    pub fn to_text(&self) -> Result<String> {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.push(match self.get(i, j) {
                    1 => '+',
                    -1 => '-',
                    _ => {
                        return Err(Error::Parse(format!(
                            "zero entry at ({i}, {j}) cannot be exported"
                        )))
                    }
                });
            }
            s.push('\n');
        }
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<SignMatrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let mut it = header.split_whitespace();
        let rows: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad header".into()))?;
        let cols: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad header".into()))?;
        let mut entries = Vec::with_capacity(rows * cols);
        for line in lines.take(rows) {
            for ch in line.trim().chars() {
                entries.push(match ch {
                    '+' => 1,
                    '-' => -1,
                    _ => return Err(Error::Parse(format!("unexpected character '{ch}'"))),
                });
            }
        }
        if entries.len() != rows * cols {
            return Err(Error::Parse(format!(
                "expected {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(SignMatrix { rows, cols, entries })
    }
}

/// Construction chain for a registry order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    One,
    Two,
    Paley1(u64),
    Paley2(u64),
    Sylvester(Box<Provenance>),
    Kronecker(Box<Provenance>, Box<Provenance>),
    Imported,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::One => write!(f, "unit"),
            Provenance::Two => write!(f, "order2"),
            Provenance::Paley1(q) => write!(f, "paley1(q={q})"),
            Provenance::Paley2(q) => write!(f, "paley2(q={q})"),
            Provenance::Sylvester(p) => write!(f, "sylvester({p})"),
            Provenance::Kronecker(a, b) => write!(f, "kron({a},{b})"),
            Provenance::Imported => write!(f, "imported"),
        }
    }
}

/// A validated Hadamard matrix: H·Hᵀ = order·I in exact integer arithmetic.
#[derive(Debug, Clone)]
pub struct HadamardMatrix {
    pub order: u64,
    pub matrix: SignMatrix,
    pub provenance: Provenance,
}

impl HadamardMatrix {
    fn new(matrix: SignMatrix, provenance: Provenance) -> HadamardMatrix {
        let order = matrix.rows() as u64;
        let h = HadamardMatrix { order, matrix, provenance };
        debug_assert!(h.validate());
        h
    }

    /// Check H·Hᵀ = order·I exactly.
    pub fn validate(&self) -> bool {
        let m = &self.matrix;
        if m.rows() != m.cols() || m.rows() as u64 != self.order {
            return false;
        }
        let n = m.rows();
        for i in 0..n {
            for j in i..n {
                let mut dot = 0i64;
                for k in 0..n {
                    let a = m.get(i, k);
                    let b = m.get(j, k);
                    if a == 0 || b == 0 {
                        return false;
                    }
                    dot += a as i64 * b as i64;
                }
                let want = if i == j { n as i64 } else { 0 };
                if dot != want {
                    return false;
                }
            }
        }
        true
    }

    /// Negate rows and columns so the first row and column are all +1.
    fn normalize(mut self) -> HadamardMatrix {
        let n = self.matrix.rows();
        for j in 0..n {
            if self.matrix.get(0, j) == -1 {
                for i in 0..n {
                    let v = self.matrix.get(i, j);
                    self.matrix.set(i, j, -v);
                }
            }
        }
        for i in 0..n {
            if self.matrix.get(i, 0) == -1 {
                for j in 0..n {
                    let v = self.matrix.get(i, j);
                    self.matrix.set(i, j, -v);
                }
            }
        }
        self
    }

    pub fn unit() -> HadamardMatrix {
        HadamardMatrix::new(SignMatrix::from_fn(1, 1, |_, _| 1), Provenance::One)
    }
}

/// Sylvester doubling: [[H, H], [H, −H]].
pub fn sylvester(core: &HadamardMatrix) -> HadamardMatrix {
    let n = core.matrix.rows();
    let m = SignMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let v = core.matrix.get(i % n, j % n);
        if i >= n && j >= n {
            -v
        } else {
            v
        }
    });
    HadamardMatrix::new(m, Provenance::Sylvester(Box::new(core.provenance.clone())))
}

fn is_odd_prime(q: u64) -> bool {
    if q < 3 || q % 2 == 0 {
        return false;
    }
    let mut f = 3u64;
    while f * f <= q {
        if q % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

/// Quadratic character table over GF(q): chi[0] = 0, chi[x] = ±1.
fn quadratic_character(q: u64) -> Vec<i8> {
    let mut chi = vec![-1i8; q as usize];
    chi[0] = 0;
    for x in 1..q {
        chi[((x * x) % q) as usize] = 1;
    }
    chi
}

/// Paley constructions over prime fields.
///
/// For q ≡ 3 mod 4: order q+1 (type I). For q ≡ 1 mod 4: order 2(q+1)
/// (type II). Prime powers q = p^k with k >= 2 are not supported; the
/// registry's imported channel covers the orders they would add.
pub fn paley(q: u64) -> Result<HadamardMatrix> {
    if !is_odd_prime(q) {
        return Err(Error::NotOddPrime(q));
    }
    let chi = quadratic_character(q);
    let qs = q as usize;
    // core (q+1)x(q+1) matrix S: s_00 = 0, border ±1, interior the
    // Jacobsthal matrix Q with q_ij = chi(i-j)
    let s = |i: usize, j: usize| -> i8 {
        match (i, j) {
            (0, 0) => 0,
            (0, _) => 1,
            (_, 0) => {
                if q % 4 == 3 {
                    -1
                } else {
                    1
                }
            }
            _ => chi[(i - 1 + qs - (j - 1)) % qs],
        }
    };
    let h = if q % 4 == 3 {
        // type I: H = S + I is Hadamard (S is skew)
        let n = qs + 1;
        let m = SignMatrix::from_fn(n, n, |i, j| if i == j { 1 + s(i, j) } else { s(i, j) });
        HadamardMatrix::new(m, Provenance::Paley1(q))
    } else {
        // type II: replace entries of the symmetric S by 2x2 blocks
        let n = 2 * (qs + 1);
        let m = SignMatrix::from_fn(n, n, |i, j| {
            let v = s(i / 2, j / 2);
            let (bi, bj) = (i % 2, j % 2);
            if v == 0 {
                // [[1, -1], [-1, -1]]
                if bi == 0 && bj == 0 {
                    1
                } else {
                    -1
                }
            } else {
                // v * [[1, 1], [1, -1]]
                if bi == 1 && bj == 1 {
                    -v
                } else {
                    v
                }
            }
        });
        HadamardMatrix::new(m, Provenance::Paley2(q))
    };
    Ok(h.normalize())
}

/// Kronecker product of two Hadamard matrices.
pub fn kronecker(a: &HadamardMatrix, b: &HadamardMatrix) -> HadamardMatrix {
    let (na, nb) = (a.matrix.rows(), b.matrix.rows());
    let m = SignMatrix::from_fn(na * nb, na * nb, |i, j| {
        a.matrix.get(i / nb, j / nb) * b.matrix.get(i % nb, j % nb)
    });
    HadamardMatrix::new(
        m,
        Provenance::Kronecker(
            Box::new(a.provenance.clone()),
            Box::new(b.provenance.clone()),
        ),
    )
}

/// Sorted set of known Hadamard orders with provenance chains.
#[derive(Debug, Clone)]
pub struct OrderRegistry {
    orders: BTreeMap<u64, Provenance>,
}

impl OrderRegistry {
    pub fn orders(&self) -> impl Iterator<Item = u64> + '_ {
        self.orders.keys().copied()
    }

    pub fn contains(&self, order: u64) -> bool {
        self.orders.contains_key(&order)
    }

    pub fn provenance(&self, order: u64) -> Option<&Provenance> {
        self.orders.get(&order)
    }

    /// Largest registry order h <= n, and d = n − h. h = 1 always exists.
    pub fn decompose(&self, n: u64) -> (u64, u64) {
        let h = self
            .orders
            .range(..=n)
            .next_back()
            .map(|(&o, _)| o)
            .expect("registry always contains 1");
        (h, n - h)
    }

    /// Hadamard gap function: max successor gap among orders h_i <= x.
    ///
    /// Requires at least one registry order above x so every h_i <= x has a
    /// successor.
    pub fn gap_function(&self, x: f64) -> Result<u64> {
        if self.orders.keys().next_back().map_or(true, |&m| (m as f64) <= x) {
            return Err(Error::RegistryHorizon(x));
        }
        let mut best = 0u64;
        let mut iter = self.orders.keys().peekable();
        while let Some(&h) = iter.next() {
            if (h as f64) > x {
                break;
            }
            if let Some(&&next) = iter.peek() {
                best = best.max(next - h);
            }
        }
        Ok(best)
    }

    /// Rebuild a Hadamard matrix from the stored construction chain.
    /// Imported orders cannot be materialized.
    pub fn materialize(&self, order: u64) -> Result<HadamardMatrix> {
        let prov = self.orders.get(&order).ok_or(Error::UnknownOrder(order))?;
        materialize_provenance(prov).ok_or(Error::NoConstruction(order))
    }
}

fn materialize_provenance(p: &Provenance) -> Option<HadamardMatrix> {
    match p {
        Provenance::One => Some(HadamardMatrix::unit()),
        Provenance::Two => Some(sylvester(&HadamardMatrix::unit())),
        Provenance::Paley1(q) | Provenance::Paley2(q) => paley(*q).ok(),
        Provenance::Sylvester(inner) => Some(sylvester(&materialize_provenance(inner)?)),
        Provenance::Kronecker(a, b) => Some(kronecker(
            &materialize_provenance(a)?,
            &materialize_provenance(b)?,
        )),
        Provenance::Imported => None,
    }
}

/// Closure of {1, 2} ∪ {Paley orders} under Sylvester doubling and
/// Kronecker products, capped at `limit`, plus any imported orders.
///
/// Constructive provenance wins over "imported" when both apply.
pub fn build_registry(limit: u64, imported: Option<&[u64]>) -> Result<OrderRegistry> {
    if limit < 4 {
        return Err(Error::RangeTooSmall(format!("registry limit {limit} < 4")));
    }
    let mut orders: BTreeMap<u64, Provenance> = BTreeMap::new();
    orders.insert(1, Provenance::One);
    orders.insert(2, Provenance::Two);
    let mut queue: Vec<u64> = vec![2];
    for q in (3..=limit).step_by(2) {
        if !is_odd_prime(q) {
            continue;
        }
        let (order, prov) = if q % 4 == 3 {
            (q + 1, Provenance::Paley1(q))
        } else {
            (2 * (q + 1), Provenance::Paley2(q))
        };
        if order <= limit && !orders.contains_key(&order) {
            orders.insert(order, prov);
            queue.push(order);
        }
    }
    // breadth-first closure under doubling and products
    while let Some(o) = queue.pop() {
        let prov_o = orders[&o].clone();
        let doubled = 2 * o;
        if doubled <= limit && !orders.contains_key(&doubled) {
            orders.insert(doubled, Provenance::Sylvester(Box::new(prov_o.clone())));
            queue.push(doubled);
        }
        let partners: Vec<(u64, Provenance)> = orders
            .iter()
            .filter(|(&p, _)| p > 2 && p.checked_mul(o).is_some_and(|m| m <= limit))
            .map(|(&p, pr)| (p, pr.clone()))
            .collect();
        if o > 2 {
            for (p, prov_p) in partners {
                let prod = p * o;
                if !orders.contains_key(&prod) {
                    orders.insert(
                        prod,
                        Provenance::Kronecker(Box::new(prov_p), Box::new(prov_o.clone())),
                    );
                    queue.push(prod);
                }
            }
        }
    }
    if let Some(list) = imported {
        for &o in list {
            if o > 2 && o % 4 != 0 {
                return Err(Error::BadImportedOrder(o));
            }
            if o <= limit {
                orders.entry(o).or_insert(Provenance::Imported);
            }
        }
    }
    Ok(OrderRegistry { orders })
}

/// Explicit gap bound 12·2^β·n^(α/(1+α)) from an (α, β) order-density result.
pub fn gap_bound(alpha: f64, beta: f64, n: f64) -> f64 {
    assert!(alpha > 0.0 && beta > 0.0 && n >= 1.0);
    12.0 * 2f64.powf(beta) * n.powf(alpha / (1.0 + alpha))
}

/// Known Hadamard orders shipped with the crate (1, 2, and all multiples of
/// 4 up to 1000 except 668, 716, 892, which are open).
pub fn default_known_orders() -> Vec<u64> {
    parse_order_list(include_str!("../data/known_orders.txt"))
        .expect("bundled order list is well-formed")
}

/// Parse an order list: one positive integer per line, '#' comments allowed.
pub fn parse_order_list(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: u64 = line
            .parse()
            .map_err(|_| Error::Parse(format!("bad order entry '{line}'")))?;
        if v == 0 {
            return Err(Error::Parse("order 0 is not valid".into()));
        }
        out.push(v);
    }
    Ok(out)
}
