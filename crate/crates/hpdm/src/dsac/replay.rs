//! Uniform ring replay buffer, stored struct-of-arrays.

use rand::Rng;

/// One stored interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub done: bool,
}

/// Borrowed view of a stored transition.
#[derive(Debug, Clone, Copy)]
pub struct TransitionRef<'a> {
    pub obs: &'a [f64],
    pub action: &'a [f64],
    pub reward: f64,
    pub next_obs: &'a [f64],
    pub done: bool,
}

pub struct ReplayBuffer {
    capacity: usize,
    obs_w: usize,
    act_w: usize,
    obs: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_obs: Vec<f64>,
    done: Vec<bool>,
    len: usize,
    head: usize,
    total_pushed: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_w: usize, act_w: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            capacity,
            obs_w,
            act_w,
            obs: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_obs: Vec::new(),
            done: Vec::new(),
            len: 0,
            head: 0,
            total_pushed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Count of every push ever made, ignoring eviction.
    pub fn total_pushed(&self) -> u64 {
        self.total_pushed
    }

    /// Append a transition, evicting the oldest once at capacity.
    pub fn push(&mut self, t: &Transition) {
        assert_eq!(t.obs.len(), self.obs_w, "observation width mismatch");
        assert_eq!(t.next_obs.len(), self.obs_w, "observation width mismatch");
        assert_eq!(t.action.len(), self.act_w, "action width mismatch");
        if self.len < self.capacity {
            self.obs.extend_from_slice(&t.obs);
            self.next_obs.extend_from_slice(&t.next_obs);
            self.actions.extend_from_slice(&t.action);
            self.rewards.push(t.reward);
            self.done.push(t.done);
            self.len += 1;
        } else {
            let i = self.head;
            self.obs[i * self.obs_w..(i + 1) * self.obs_w].copy_from_slice(&t.obs);
            self.next_obs[i * self.obs_w..(i + 1) * self.obs_w].copy_from_slice(&t.next_obs);
            self.actions[i * self.act_w..(i + 1) * self.act_w].copy_from_slice(&t.action);
            self.rewards[i] = t.reward;
            self.done[i] = t.done;
            self.head = (self.head + 1) % self.capacity;
        }
        self.total_pushed += 1;
    }

    pub fn get(&self, i: usize) -> TransitionRef<'_> {
        assert!(i < self.len);
        TransitionRef {
            obs: &self.obs[i * self.obs_w..(i + 1) * self.obs_w],
            action: &self.actions[i * self.act_w..(i + 1) * self.act_w],
            reward: self.rewards[i],
            next_obs: &self.next_obs[i * self.obs_w..(i + 1) * self.obs_w],
            done: self.done[i],
        }
    }

    /// Uniform-with-replacement index draw for one minibatch.
    ///
    /// Panics when fewer than `batch` transitions are stored.
    pub fn sample_indices<R: Rng>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        assert!(
            self.len >= batch,
            "replay buffer holds {} transitions, need {batch}",
            self.len
        );
        (0..batch).map(|_| rng.gen_range(0..self.len)).collect()
    }
}
