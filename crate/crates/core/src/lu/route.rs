//! Greedy store-and-forward routing over point-to-point links.

use std::collections::{HashMap, VecDeque};

use super::schedule::{BlockKey, Event, Medium};
use crate::error::{Error, Result};

/// A connected link graph with all-pairs hop distances.
#[derive(Clone, Debug)]
pub struct Network {
    adj: Vec<Vec<u32>>,
    dist: Vec<u16>,
}

impl Network {
    pub fn new(mut adj: Vec<Vec<u32>>) -> Result<Self> {
        let n = adj.len();
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        let mut dist = vec![u16::MAX; n * n];
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            row[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if row[v as usize] == u16::MAX {
                        row[v as usize] = row[u] + 1;
                        queue.push_back(v as usize);
                    }
                }
            }
            if row.contains(&u16::MAX) {
                return Err(Error::Invariant("link graph is not connected".into()));
            }
        }
        Ok(Network { adj, dist })
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbours(&self, p: u32) -> &[u32] {
        &self.adj[p as usize]
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adj
    }

    pub fn distance(&self, a: u32, b: u32) -> u32 {
        self.dist[a as usize * self.len() + b as usize] as u32
    }

    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0) as u32
    }
}

/// Moves every `(key, destination)` request to its destination, one hop per
/// cycle per transfer. Each cycle scans the pending requests in order and
/// forwards each from the nearest idle holder to an idle neighbour one hop
/// closer. Relays keep their copy and serve later requests.
///
/// `holders` must list the current holders of every requested key; it is
/// updated with the new copies. Returns the transfers of each cycle.
pub fn route(net: &Network, holders: &mut HashMap<BlockKey, Vec<u32>>, requests: &[(BlockKey, u32)]) -> Vec<Vec<Event>> {
    let n = net.len();
    let mut pending: Vec<(BlockKey, u32)> = Vec::new();
    for &(key, dest) in requests {
        let held = holders.get(&key).is_some_and(|h| h.contains(&dest));
        if !held && !pending.contains(&(key, dest)) {
            pending.push((key, dest));
        }
    }
    let mut cycles = Vec::new();
    while !pending.is_empty() {
        let mut busy = vec![false; n];
        let mut idle = n;
        let mut events = Vec::new();
        for &(key, dest) in &pending {
            if idle < 2 {
                break;
            }
            let hs = &holders[&key];
            let Some(&h) = hs.iter().filter(|&&h| !busy[h as usize]).min_by_key(|&&h| (net.distance(h, dest), h)) else {
                continue;
            };
            let d = net.distance(h, dest);
            let Some(&m) = net
                .neighbours(h)
                .iter()
                .find(|&&m| !busy[m as usize] && net.distance(m, dest) + 1 == d)
            else {
                continue;
            };
            busy[h as usize] = true;
            busy[m as usize] = true;
            idle -= 2;
            events.push(Event::Send {
                from: h,
                to: vec![m],
                key,
                medium: Medium::Link,
            });
        }
        debug_assert!(!events.is_empty());
        for e in &events {
            if let Event::Send { to, key, .. } = e {
                holders.get_mut(key).expect("requested key").push(to[0]);
            }
        }
        pending.retain(|(key, dest)| !holders[key].contains(dest));
        cycles.push(events);
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u32) -> Network {
        let adj = (0..n)
            .map(|i| {
                let mut a = Vec::new();
                if i > 0 {
                    a.push(i - 1);
                }
                if i + 1 < n {
                    a.push(i + 1);
                }
                a
            })
            .collect();
        Network::new(adj).unwrap()
    }

    #[test]
    fn distances_on_a_path() {
        let net = path(5);
        assert_eq!(net.distance(0, 4), 4);
        assert_eq!(net.diameter(), 4);
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        assert!(Network::new(vec![vec![], vec![]]).is_err());
    }

    #[test]
    fn hop_by_hop_delivery() {
        let net = path(4);
        let key = BlockKey::A(0, 0);
        let mut holders = HashMap::from([(key, vec![0])]);
        let cycles = route(&net, &mut holders, &[(key, 3)]);
        assert_eq!(cycles.len(), 3);
        assert!(holders[&key].contains(&3));
    }

    #[test]
    fn relays_serve_later_requests() {
        let net = path(4);
        let key = BlockKey::A(0, 0);
        let mut holders = HashMap::from([(key, vec![0])]);
        let cycles = route(&net, &mut holders, &[(key, 3), (key, 2), (key, 1)]);
        assert_eq!(cycles.len(), 3);
    }

    #[test]
    fn present_data_needs_no_cycles() {
        let net = Network::new(vec![vec![]]).unwrap();
        let key = BlockKey::Linv(0);
        let mut holders = HashMap::from([(key, vec![0])]);
        assert!(route(&net, &mut holders, &[(key, 0)]).is_empty());
    }
}
