use std::collections::VecDeque;

use super::PDag;

/// Whether `x` and `y` are d-separated by `z` in the directed graph `dag`.
///
/// Walks active trails from `x`, tracking whether each node is entered from
/// a child (moving up) or from a parent (moving down). A collider passes the
/// walk on only if it or one of its descendants is in `z`.
pub fn d_separated(dag: &PDag, x: usize, y: usize, z: &[usize]) -> bool {
    let n = dag.n_nodes();
    let mut in_z = vec![false; n];
    for &v in z {
        in_z[v] = true;
    }
    if in_z[x] || in_z[y] {
        return true;
    }
    // Nodes in z or with a descendant in z.
    let mut opens_collider = in_z.clone();
    let mut stack: Vec<usize> = z.to_vec();
    while let Some(v) = stack.pop() {
        for p in dag.parents(v) {
            if !opens_collider[p] {
                opens_collider[p] = true;
                stack.push(p);
            }
        }
    }

    const UP: usize = 0;
    const DOWN: usize = 1;
    let mut visited = vec![[false; 2]; n];
    let mut queue = VecDeque::from([(x, UP)]);
    while let Some((v, dir)) = queue.pop_front() {
        if visited[v][dir] {
            continue;
        }
        visited[v][dir] = true;
        if v == y {
            return false;
        }
        if dir == UP && !in_z[v] {
            queue.extend(dag.parents(v).into_iter().map(|p| (p, UP)));
            queue.extend(dag.children(v).into_iter().map(|c| (c, DOWN)));
        } else if dir == DOWN {
            if !in_z[v] {
                queue.extend(dag.children(v).into_iter().map(|c| (c, DOWN)));
            }
            if opens_collider[v] {
                queue.extend(dag.parents(v).into_iter().map(|p| (p, UP)));
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    /// F -> D, F -> E, D -> T, E -> T.
    fn diamond() -> (PDag, [usize; 4]) {
        let mut g = PDag::new(["F", "D", "E", "T"].map(String::from).to_vec());
        for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            g.add_directed(a, b).unwrap();
        }
        (g, [0, 1, 2, 3])
    }

    #[test]
    fn diamond_separations() {
        let (g, [f, d, e, t]) = diamond();
        assert!(d_separated(&g, f, t, &[d, e]));
        assert!(!d_separated(&g, d, t, &[e, f]));
        assert!(!d_separated(&g, e, t, &[d, f]));
        assert!(!d_separated(&g, f, t, &[d]));
        // D and E are separated by their common cause, but not once T is observed.
        assert!(d_separated(&g, d, e, &[f]));
        assert!(!d_separated(&g, d, e, &[f, t]));
    }

    #[test]
    fn single_edge() {
        let mut g = PDag::new(vec!["x".into(), "y".into()]);
        g.add_directed(0, 1).unwrap();
        assert!(!d_separated(&g, 0, 1, &[]));
        assert!(!d_separated(&g, 1, 0, &[]));
    }

    #[test]
    fn collider_opened_by_descendant() {
        // a -> c <- b, c -> d
        let mut g = PDag::new(["a", "b", "c", "d"].map(String::from).to_vec());
        for (s, t) in [(0, 2), (1, 2), (2, 3)] {
            g.add_directed(s, t).unwrap();
        }
        assert!(d_separated(&g, 0, 1, &[]));
        assert!(!d_separated(&g, 0, 1, &[3]));
        assert!(!d_separated(&g, 0, 1, &[2]));
    }
}
