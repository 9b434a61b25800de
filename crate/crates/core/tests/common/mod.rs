#![allow(dead_code)]

use blocking_jacobi::standup::EtaState;

/// All canonical states with window length at most `len`, at lo = 0.
pub fn small_states(k: u32, len: usize) -> Vec<EtaState> {
    let mut out = vec![EtaState::ground(k, 0)];
    for n in 1..=len {
        let mut v = vec![0u32; n];
        loop {
            if v[0] != 0 && v[n - 1] != k {
                out.push(EtaState::new(k, 0, v.clone()).unwrap());
            }
            let mut i = 0;
            while i < n && v[i] == k {
                v[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            v[i] += 1;
        }
    }
    out
}
