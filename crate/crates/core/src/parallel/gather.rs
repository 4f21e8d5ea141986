use super::Comm;
use crate::error::{invalid_argument, Error, Result};
use crate::mesh::{Gidx, Idx};

/// Moves owned entries to and from one root rank in global-index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GatherScatterPlan {
    root: usize,
    size: usize,
    owned: Vec<Idx>,
    nb_global: usize,
    /// At the root: for each rank, the global position of each owned entry.
    positions: Vec<Vec<usize>>,
}

impl GatherScatterPlan {
    /// Collective. Non-ghost global indices over all ranks must be exactly `1..=G`.
    pub fn build(global_index: &[Gidx], ghost: &[bool], root: usize, comm: &Comm) -> Result<Self> {
        let me = comm.rank();
        let valid_lengths = global_index.len() == ghost.len();
        let owned: Vec<Idx> = if valid_lengths {
            (0..ghost.len())
                .filter(|&i| !ghost[i])
                .map(|i| i as Idx)
                .collect()
        } else {
            Vec::new()
        };
        let gids: Option<Vec<Gidx>> =
            valid_lengths.then(|| owned.iter().map(|&i| global_index[i as usize]).collect());
        let gathered = comm.gather(gids, root);
        let verdict: std::result::Result<(usize, Vec<Vec<usize>>), String> = match gathered {
            Some(all) => check_bijection(all),
            None => Ok((0, Vec::new())),
        };
        let status = comm.broadcast(
            (me == root).then(|| verdict.as_ref().map(|(g, _)| *g).map_err(Clone::clone)),
            root,
        );
        let nb_global = status.map_err(Error::Plan)?;
        let positions = verdict.map(|(_, p)| p).unwrap_or_default();
        Ok(Self {
            root,
            size: global_index.len(),
            owned,
            nb_global,
            positions,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nb_global(&self) -> usize {
        self.nb_global
    }

    pub fn nb_owned(&self) -> usize {
        self.owned.len()
    }

    /// Collective. Owned values of every rank, ordered by global index, at the root.
    pub fn gather<T: Copy + Default + Send + 'static>(
        &self,
        data: &[T],
        block: usize,
        comm: &Comm,
    ) -> Result<Option<Vec<T>>> {
        let ok = data.len() == self.size * block;
        let packed: Option<Vec<T>> = ok.then(|| {
            self.owned
                .iter()
                .flat_map(|&i| {
                    data[i as usize * block..(i as usize + 1) * block]
                        .iter()
                        .copied()
                })
                .collect()
        });
        let all = comm.gather(packed, self.root);
        let all_ok = comm.all_ok(ok);
        if !ok {
            return Err(invalid_argument(format!(
                "gather of {} values over {} entries of {block}",
                data.len(),
                self.size
            )));
        }
        if !all_ok {
            return Err(Error::Plan("a rank had mismatched data".into()));
        }
        Ok(all.map(|parts| {
            let mut out = vec![T::default(); self.nb_global * block];
            for (rank, values) in parts.into_iter().enumerate() {
                let values = values.expect("checked above");
                for (k, &g) in self.positions[rank].iter().enumerate() {
                    out[g * block..(g + 1) * block]
                        .copy_from_slice(&values[k * block..(k + 1) * block]);
                }
            }
            out
        }))
    }

    /// Collective. Distribute a root array in global order to the owned entries; ghosts are untouched.
    pub fn scatter<T: Copy + Send + 'static>(
        &self,
        global: Option<&[T]>,
        data: &mut [T],
        block: usize,
        comm: &Comm,
    ) -> Result<()> {
        let tag = comm.next_collective_tag();
        if comm.rank() == self.root {
            let root_ok = global.is_some_and(|g| g.len() == self.nb_global * block);
            for (rank, pos) in self.positions.iter().enumerate() {
                let msg: Option<Vec<T>> = root_ok.then(|| {
                    let g = global.unwrap();
                    pos.iter()
                        .flat_map(|&p| g[p * block..(p + 1) * block].iter().copied())
                        .collect()
                });
                comm.send(rank, tag, msg);
            }
        }
        let msg: Option<Vec<T>> = comm.recv(self.root, tag);
        let local_ok = data.len() == self.size * block;
        let all_ok = comm.all_ok(local_ok);
        let Some(values) = msg else {
            return Err(invalid_argument(format!(
                "scatter source must hold {} values",
                self.nb_global * block
            )));
        };
        if !local_ok {
            return Err(invalid_argument(format!(
                "scatter into {} values over {} entries of {block}",
                data.len(),
                self.size
            )));
        }
        if !all_ok {
            return Err(Error::Plan("a rank had mismatched data".into()));
        }
        for (k, &i) in self.owned.iter().enumerate() {
            data[i as usize * block..(i as usize + 1) * block]
                .copy_from_slice(&values[k * block..(k + 1) * block]);
        }
        Ok(())
    }
}

fn check_bijection(
    all: Vec<Option<Vec<Gidx>>>,
) -> std::result::Result<(usize, Vec<Vec<usize>>), String> {
    let mut per_rank = Vec::with_capacity(all.len());
    for (rank, g) in all.into_iter().enumerate() {
        per_rank
            .push(g.ok_or_else(|| format!("rank {rank}: global_index and ghost lengths differ"))?);
    }
    let total: usize = per_rank.iter().map(Vec::len).sum();
    let mut seen = vec![false; total];
    let mut positions = Vec::with_capacity(per_rank.len());
    for (rank, gids) in per_rank.iter().enumerate() {
        let mut pos = Vec::with_capacity(gids.len());
        for &g in gids {
            if g < 1 || g as usize > total {
                return Err(format!("rank {rank}: global index {g} outside 1..={total}"));
            }
            let p = g as usize - 1;
            if seen[p] {
                return Err(format!("global index {g} owned more than once"));
            }
            seen[p] = true;
            pos.push(p);
        }
        positions.push(pos);
    }
    Ok((total, positions))
}
