//! Euclidean projection onto the cone of nondecreasing sequences by
//! pool-adjacent-violators. O(N): each element is merged at most once.

/// Projects `y` onto nondecreasing sequences.
pub fn project_monotone(y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    project_monotone_into(y, &mut out);
    out
}

pub(crate) fn project_monotone_into(y: &[f64], out: &mut [f64]) {
    let n = y.len();
    if n == 0 {
        return;
    }
    // Stack of pooled blocks as (mean, count).
    let mut means: Vec<f64> = Vec::with_capacity(n);
    let mut counts: Vec<usize> = Vec::with_capacity(n);
    for &v in y {
        means.push(v);
        counts.push(1);
        while means.len() > 1 && means[means.len() - 2] > means[means.len() - 1] {
            let (m2, c2) = (means.pop().unwrap(), counts.pop().unwrap());
            let top = means.len() - 1;
            let c1 = counts[top];
            let c = c1 + c2;
            means[top] = (means[top] * c1 as f64 + m2 * c2 as f64) / c as f64;
            counts[top] = c;
        }
    }
    let mut i = 0;
    for (m, c) in means.into_iter().zip(counts) {
        out[i..i + c].fill(m);
        i += c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn already_monotone_is_fixed() {
        assert_eq!(project_monotone(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pooled_cases() {
        assert_eq!(project_monotone(&[3.0, 1.0, 2.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(project_monotone(&[2.0, 1.0]), vec![1.5, 1.5]);
    }

    #[test]
    fn preserves_sum_and_is_monotone() {
        let y = [0.4, -1.2, 3.0, 2.2, 2.2, -0.5, 0.1];
        let x = project_monotone(&y);
        assert_relative_eq!(x.iter().sum::<f64>(), y.iter().sum::<f64>(), epsilon = 1e-12);
        assert!(x.windows(2).all(|w| w[0] <= w[1]));
    }
}
