use super::PpoError;

/// Generalized advantage estimation over one rollout.
///
/// `dones[t]` marks that the episode ended with transition `t`, which cuts
/// both the bootstrap and the advantage recursion. Returns
/// `(advantages, returns)` with `returns = advantages + values`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), PpoError> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(PpoError::Shape(format!(
            "gae inputs differ in length: rewards {n}, values {}, dones {}",
            values.len(),
            dones.len()
        )));
    }
    let mut advantages = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = bootstrap_value;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        advantages[t] = next_adv;
        next_value = values[t];
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((advantages, returns))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_terminal_step() {
        let (a, r) = compute_gae(&[1.0], &[0.0], &[true], 5.0, 0.99, 0.95).unwrap();
        assert_eq!(a, vec![1.0]);
        assert_eq!(r, vec![1.0]);
    }

    #[test]
    fn lambda_zero_gives_td_residuals() {
        let rewards = [0.5, -1.0, 2.0, 0.0];
        let values = [0.1, 0.2, -0.3, 0.4];
        let dones = [false, true, false, false];
        let (a, _) = compute_gae(&rewards, &values, &dones, 0.7, 0.9, 0.0).unwrap();
        let next = [0.2, -0.3, 0.4, 0.7];
        for t in 0..4 {
            let live = if dones[t] { 0.0 } else { 1.0 };
            assert_eq!(a[t], rewards[t] + 0.9 * next[t] * live - values[t]);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(compute_gae(&[1.0, 2.0], &[0.0], &[false, false], 0.0, 0.99, 0.95).is_err());
    }
}
