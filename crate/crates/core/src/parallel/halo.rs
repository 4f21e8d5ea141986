use std::collections::BTreeMap;

use super::Comm;
use crate::error::{invalid_argument, Error, Result};
use crate::mesh::{Gidx, Idx};

/// Who sends which local entries to whom, and where received values go.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HaloExchangePlan {
    size: usize,
    /// Neighbour rank to local owned indices it needs from us.
    send: BTreeMap<usize, Vec<Idx>>,
    /// Neighbour rank to local ghost indices it fills.
    recv: BTreeMap<usize, Vec<Idx>>,
}

type Request = Vec<(Idx, Gidx)>;

impl HaloExchangePlan {
    /// Collective. Every entry whose `partition` differs from this rank is a
    /// ghost filled from `remote_index` on its owner.
    pub fn build(
        partition: &[Idx],
        remote_index: &[Idx],
        global_index: &[Gidx],
        comm: &Comm,
    ) -> Result<Self> {
        let me = comm.rank();
        let nb = comm.size();
        let mut local_error = None;
        if partition.len() != remote_index.len() || partition.len() != global_index.len() {
            local_error = Some(format!(
                "rank {me}: identity arrays of lengths {}, {}, {}",
                partition.len(),
                remote_index.len(),
                global_index.len()
            ));
        }
        let mut recv: BTreeMap<usize, Vec<Idx>> = BTreeMap::new();
        let mut requests: Vec<Request> = vec![Vec::new(); nb];
        if local_error.is_none() {
            for (i, &p) in partition.iter().enumerate() {
                if p as usize == me {
                    continue;
                }
                if p < 0 || p as usize >= nb {
                    local_error = Some(format!(
                        "rank {me}: entry {i} owned by nonexistent rank {p}"
                    ));
                    break;
                }
                recv.entry(p as usize).or_default().push(i as Idx);
                requests[p as usize].push((remote_index[i], global_index[i]));
            }
        }
        if local_error.is_some() {
            requests = vec![Vec::new(); nb];
        }

        let incoming = comm.all_to_all(requests);
        let mut send = BTreeMap::new();
        let mut replies: Vec<Option<String>> = vec![None; nb];
        for (src, req) in incoming.into_iter().enumerate() {
            if req.is_empty() {
                continue;
            }
            for &(r, g) in &req {
                let valid = r >= 0
                    && (r as usize) < partition.len()
                    && partition[r as usize] as usize == me
                    && global_index[r as usize] == g;
                if !valid {
                    replies[src] = Some(format!(
                        "rank {src} asks rank {me} for index {r} (global {g}), which it does not own"
                    ));
                    break;
                }
            }
            if replies[src].is_none() {
                send.insert(src, req.into_iter().map(|(r, _)| r).collect());
            }
        }
        let answers = comm.all_to_all(replies);
        let failures: Vec<String> = local_error
            .into_iter()
            .chain(answers.into_iter().flatten())
            .collect();
        if !failures.is_empty() {
            return Err(Error::Plan(failures.join("; ")));
        }
        Ok(Self {
            size: partition.len(),
            send,
            recv,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn send_lists(&self) -> &BTreeMap<usize, Vec<Idx>> {
        &self.send
    }

    pub fn recv_lists(&self) -> &BTreeMap<usize, Vec<Idx>> {
        &self.recv
    }

    pub fn is_empty(&self) -> bool {
        self.send.is_empty() && self.recv.is_empty()
    }

    /// Collective. Copy owners' values into ghost slots; `block` values per entry.
    pub fn execute<T: Copy + Send + 'static>(
        &self,
        data: &mut [T],
        block: usize,
        comm: &Comm,
    ) -> Result<()> {
        let tag = comm.next_collective_tag();
        let ok = data.len() == self.size * block;
        for (&dst, idx) in &self.send {
            let msg: std::result::Result<Vec<T>, ()> = if ok {
                Ok(idx
                    .iter()
                    .flat_map(|&i| {
                        data[i as usize * block..(i as usize + 1) * block]
                            .iter()
                            .copied()
                    })
                    .collect())
            } else {
                Err(())
            };
            comm.send(dst, tag, msg);
        }
        let mut peer_failed = false;
        for (&src, idx) in &self.recv {
            match comm.recv::<std::result::Result<Vec<T>, ()>>(src, tag) {
                Ok(values) if ok => {
                    for (k, &i) in idx.iter().enumerate() {
                        data[i as usize * block..(i as usize + 1) * block]
                            .copy_from_slice(&values[k * block..(k + 1) * block]);
                    }
                }
                Ok(_) => {}
                Err(()) => peer_failed = true,
            }
        }
        if !ok {
            return Err(invalid_argument(format!(
                "halo exchange of {} values over {} entries of {block}",
                data.len(),
                self.size
            )));
        }
        if peer_failed {
            return Err(Error::Plan("a neighbour rank had mismatched data".into()));
        }
        Ok(())
    }
}

/// Convenience wrapper for [`HaloExchangePlan::execute`] with one value per entry.
pub fn halo_exchange<T: Copy + Send + 'static>(
    plan: &HaloExchangePlan,
    data: &mut [T],
    comm: &Comm,
) -> Result<()> {
    plan.execute(data, 1, comm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::SimComm;

    #[test]
    fn two_rank_trace() {
        let out = SimComm::run(2, |c| {
            let (part, remote, data) = if c.rank() == 0 {
                (vec![0, 0, 1], vec![0, 1, 0], vec![10, 11, 0])
            } else {
                (vec![1, 1, 0], vec![0, 1, 1], vec![12, 13, 0])
            };
            let gidx = if c.rank() == 0 {
                vec![1, 2, 3]
            } else {
                vec![3, 4, 2]
            };
            let plan = HaloExchangePlan::build(&part, &remote, &gidx, &c).unwrap();
            let again = HaloExchangePlan::build(&part, &remote, &gidx, &c).unwrap();
            assert_eq!(plan, again);
            let mut d = data;
            halo_exchange(&plan, &mut d, &c).unwrap();
            let first = d.clone();
            halo_exchange(&plan, &mut d, &c).unwrap();
            assert_eq!(d, first);
            (plan, d)
        });
        assert_eq!(out[0].0.recv_lists()[&1], vec![2]);
        assert_eq!(out[0].0.send_lists()[&1], vec![1]);
        assert_eq!(out[0].1, vec![10, 11, 12]);
        assert_eq!(out[1].1, vec![12, 13, 11]);
    }

    #[test]
    fn multi_level_blocks() {
        let out = SimComm::run(2, |c| {
            let r = c.rank() as i64;
            let plan =
                HaloExchangePlan::build(&[r as Idx, 1 - r as Idx], &[0, 0], &[r + 1, 2 - r], &c)
                    .unwrap();
            let mut d = vec![r * 10, r * 10 + 1, -1, -1];
            plan.execute(&mut d, 2, &c).unwrap();
            d
        });
        assert_eq!(out[0], vec![0, 1, 10, 11]);
        assert_eq!(out[1], vec![10, 11, 0, 1]);
    }

    #[test]
    fn no_ghosts_empty_plan() {
        let c = Comm::serial();
        let plan = HaloExchangePlan::build(&[0, 0], &[0, 1], &[1, 2], &c).unwrap();
        assert!(plan.is_empty());
    }

    #[test]
    fn bad_remote_index_is_a_plan_error() {
        let out = SimComm::run(2, |c| {
            let remote = if c.rank() == 0 {
                vec![0, 5]
            } else {
                vec![0, 0]
            };
            let part = if c.rank() == 0 {
                vec![0, 1]
            } else {
                vec![1, 0]
            };
            let gidx = if c.rank() == 0 {
                vec![1, 2]
            } else {
                vec![2, 1]
            };
            HaloExchangePlan::build(&part, &remote, &gidx, &c)
        });
        assert!(matches!(out[0], Err(Error::Plan(_))));
        assert!(out[1].is_ok());
    }

    #[test]
    fn length_mismatch_does_not_hang() {
        let out = SimComm::run(2, |c| {
            let r = c.rank() as i64;
            let plan =
                HaloExchangePlan::build(&[r as Idx, 1 - r as Idx], &[0, 0], &[r + 1, 2 - r], &c)
                    .unwrap();
            let mut d = if r == 0 { vec![1.0; 3] } else { vec![2.0; 2] };
            plan.execute(&mut d, 1, &c)
        });
        assert!(matches!(out[0], Err(Error::InvalidArgument(_))));
        assert!(matches!(out[1], Err(Error::Plan(_))));
    }
}
