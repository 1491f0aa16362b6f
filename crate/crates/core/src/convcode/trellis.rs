use super::EncoderSpec;

/// One trellis edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub input: u8,
    pub to: usize,
    /// `V1 << 1 | V2`.
    pub output: u8,
}

/// Time-invariant transition graph of an [`EncoderSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trellis {
    spec: EncoderSpec,
    /// Indexed by `state * 2 + input`.
    edges: Vec<Edge>,
    /// Incoming edges per destination, sorted by source state.
    incoming: Vec<[Edge; 2]>,
}

impl Trellis {
    pub fn new(spec: &EncoderSpec) -> Self {
        let n = spec.n_states();
        let mut edges = Vec::with_capacity(2 * n);
        let mut incoming: Vec<Vec<Edge>> = vec![Vec::with_capacity(2); n];
        for from in 0..n {
            for input in 0..2u8 {
                let edge = Edge {
                    from,
                    input,
                    to: spec.next_state(from, input),
                    output: spec.output(from, input),
                };
                edges.push(edge);
                incoming[edge.to].push(edge);
            }
        }
        let incoming = incoming
            .into_iter()
            .map(|mut v| {
                v.sort_by_key(|e| e.from);
                [v[0], v[1]]
            })
            .collect();
        Self {
            spec: *spec,
            edges,
            incoming,
        }
    }

    pub fn spec(&self) -> &EncoderSpec {
        &self.spec
    }

    pub fn n_states(&self) -> usize {
        self.incoming.len()
    }

    pub fn edge(&self, from: usize, input: u8) -> Edge {
        self.edges[from * 2 + usize::from(input)]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The two edges entering `to`, lowest source state first.
    pub fn incoming(&self, to: usize) -> [Edge; 2] {
        self.incoming[to]
    }
}
