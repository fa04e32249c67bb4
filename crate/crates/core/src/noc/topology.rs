use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Router port. Indices are stable and used in routing-memory words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Port {
    North = 0,
    South = 1,
    East = 2,
    West = 3,
    Local = 4,
}

pub const PORTS: usize = 5;

impl Port {
    pub const ALL: [Port; PORTS] = [Port::North, Port::South, Port::East, Port::West, Port::Local];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Port> {
        Self::ALL.get(i).copied()
    }

    /// Port on the neighbor through which a flit leaving on `self` enters.
    pub fn opposite(self) -> Port {
        match self {
            Port::North => Port::South,
            Port::South => Port::North,
            Port::East => Port::West,
            Port::West => Port::East,
            Port::Local => Port::Local,
        }
    }
}

/// `n x n` torus; node `row * n + col`. North/south move along rows,
/// east/west along columns (the X dimension).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    n: usize,
}

impl Topology {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("torus side must be positive".into()));
        }
        Ok(Self { n })
    }

    /// Side of the torus whose node count is `p`.
    pub fn for_pe_count(p: usize) -> Result<Self> {
        let n = (p as f64).sqrt().round() as usize;
        if n * n != p {
            return Err(Error::InvalidParam(format!("{p} PEs do not form a square torus")));
        }
        Self::new(n)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.n * self.n
    }

    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node / self.n, node % self.n)
    }

    pub fn node(&self, row: usize, col: usize) -> usize {
        row * self.n + col
    }

    /// Node reached by leaving `node` through `port`.
    pub fn neighbor(&self, node: usize, port: Port) -> usize {
        let n = self.n;
        let (r, c) = self.coords(node);
        match port {
            Port::North => self.node((r + n - 1) % n, c),
            Port::South => self.node((r + 1) % n, c),
            Port::East => self.node(r, (c + 1) % n),
            Port::West => self.node(r, (c + n - 1) % n),
            Port::Local => node,
        }
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (ra, ca) = self.coords(a);
        let (rb, cb) = self.coords(b);
        ring_distance(ra, rb, self.n) + ring_distance(ca, cb, self.n)
    }
}

fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = (b + n - a) % n;
    d.min(n - d)
}

/// Steps along one ring: `(count, towards increasing coordinate)`. Ties at
/// exactly half the ring go towards the increasing coordinate.
fn ring_steps(a: usize, b: usize, n: usize) -> (usize, bool) {
    let up = (b + n - a) % n;
    let down = (n - up) % n;
    if up <= down {
        (up, true)
    } else {
        (down, false)
    }
}

/// Output ports taken hop by hop from `src` to `dst` under O1Turn:
/// `coin == 0` routes X (columns) first, otherwise Y (rows) first.
pub fn route_o1turn(src: usize, dst: usize, n: usize, coin: u8) -> Result<Vec<Port>> {
    if src == dst {
        return Err(Error::InvalidParam("source equals destination".into()));
    }
    let topo = Topology::new(n)?;
    if src >= topo.nodes() || dst >= topo.nodes() {
        return Err(Error::InvalidParam(format!(
            "node out of range for a {n}x{n} torus"
        )));
    }
    let (rs, cs) = topo.coords(src);
    let (rd, cd) = topo.coords(dst);
    let (nx, east) = ring_steps(cs, cd, n);
    let (ny, south) = ring_steps(rs, rd, n);
    let x = std::iter::repeat_n(if east { Port::East } else { Port::West }, nx);
    let y = std::iter::repeat_n(if south { Port::South } else { Port::North }, ny);
    Ok(if coin == 0 { x.chain(y).collect() } else { y.chain(x).collect() })
}
