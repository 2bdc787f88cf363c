use serde::{Deserialize, Serialize};

/// Where a cell's type-1 mutation came from: the generation and time at which
/// it was first marked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Origin {
    pub generation: u32,
    pub time: f64,
}

/// One cell of the crypt.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CellState {
    /// 0 for the stem, otherwise 1..=l.
    pub generation: u32,
    pub ty: u8,
    /// Accepted daughter type-1 marks (counter model only).
    pub counter: u32,
    pub inherited_from_stem: bool,
    /// Origins of accepted type-1 marks in order; the `n`-th one feeds the
    /// `n`-th type-2 process of the counter model.
    pub origins: Vec<Origin>,
}

impl CellState {
    pub fn clean(generation: u32) -> Self {
        CellState {
            generation,
            ..CellState::default()
        }
    }

    fn child(&self, generation: u32) -> Self {
        CellState {
            generation,
            ..self.clone()
        }
    }

    pub fn is_clean(&self) -> bool {
        self.ty == 0
    }
}

/// Full crypt: the stem plus `l` generations of `2^(k-1)` daughters each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CryptState {
    pub l: u32,
    pub stem: CellState,
    /// `generations[k - 1]` holds the cells of generation `k`.
    pub generations: Vec<Vec<CellState>>,
}

impl CryptState {
    /// The all-type-0 crypt.
    pub fn new(l: u32) -> Self {
        let generations = (1..=l)
            .map(|k| vec![CellState::clean(k); 1usize << (k - 1)])
            .collect();
        CryptState {
            l,
            stem: CellState::clean(0),
            generations,
        }
    }

    pub fn population(&self) -> usize {
        1 + self.generations.iter().map(Vec::len).sum::<usize>()
    }

    pub fn cell(&self, generation: u32, index: u64) -> &CellState {
        &self.generations[generation as usize - 1][index as usize]
    }

    pub fn cell_mut(&mut self, generation: u32, index: u64) -> &mut CellState {
        &mut self.generations[generation as usize - 1][index as usize]
    }

    pub fn daughters(&self) -> impl Iterator<Item = &CellState> {
        self.generations.iter().flatten()
    }

    /// True when no cell carries a mutation, so a split changes nothing.
    pub fn is_clean(&self) -> bool {
        self.stem.is_clean() && self.daughters().all(CellState::is_clean)
    }
}

/// Performs one split: the stem yields a generation-1 daughter, every
/// generation-`k` daughter yields two generation-`k+1` cells, and generation
/// `l` is swept. Children inherit type, counter, origins and the stem flag.
pub fn step_crypt(state: &CryptState) -> CryptState {
    let l = state.l;
    let mut first = state.stem.child(1);
    if state.stem.ty >= 1 {
        first.inherited_from_stem = true;
    }
    let mut generations = Vec::with_capacity(l as usize);
    generations.push(vec![first]);
    for k in 1..l {
        let parents = &state.generations[k as usize - 1];
        let mut children = Vec::with_capacity(parents.len() * 2);
        for p in parents {
            children.push(p.child(k + 1));
            children.push(p.child(k + 1));
        }
        generations.push(children);
    }
    CryptState {
        l,
        stem: state.stem.clone(),
        generations,
    }
}
