//! Built-in groups.
//!
//! Names: `C<n>` (cyclic), `D<n>` (dihedral of order 2n), `S<n>` for
//! n ≤ 5, `A4`, `remark72` = (C₃×C₃)⋊D₄, `asl23` = (C₃×C₃)⋊SL(2,3), and
//! direct products written with `x`, e.g. `C2xS3`.
//!
//! In `remark72` the D₄ generators act on C₃×C₃ as follows: `a` swaps the
//! two components and `b` negates the second one. `asl23` is the affine
//! special linear group of the plane over F₃; it is the smallest catalog
//! group whose gadget context has three cosets of the centralizer.

use crate::group::{
    cycle_notation, Elem, FiniteGroup, GroupError, GroupSource, PermSpec, DEFAULT_CLOSURE_CAP,
};

/// Catalog groups of order at most 72, used for cross-checks.
pub const SMALL_CATALOG: &[&str] = &[
    "C1", "C2", "C3", "C4", "C5", "C6", "C2xC2", "C3xC3", "C2xC2xC2", "D3", "D4", "D5", "D6",
    "D15", "S3", "A4", "S4", "C2xS3", "S3xS3", "C2xA4", "C2xS4", "D4xC3", "C3xS4", "remark72",
];

pub fn builtin(name: &str) -> Result<FiniteGroup, GroupError> {
    builtin_with_cap(name, DEFAULT_CLOSURE_CAP)
}

pub fn builtin_with_cap(name: &str, cap: usize) -> Result<FiniteGroup, GroupError> {
    let g = build(name, cap)?;
    Ok(g.with_source(GroupSource::Builtin(name.to_string())).with_name(name))
}

fn build(name: &str, cap: usize) -> Result<FiniteGroup, GroupError> {
    let unknown = || GroupError::UnknownBuiltin(name.to_string());
    if name.contains('x') && name != "remark72" {
        let mut parts = name.split('x');
        let first = parts.next().ok_or_else(unknown)?;
        let mut acc = build(first, cap)?;
        for part in parts {
            let next = build(part, cap)?;
            if acc.order() * next.order() > cap {
                return Err(GroupError::ClosureCapExceeded(cap));
            }
            acc = FiniteGroup::direct_product(&acc, &next);
        }
        return Ok(acc);
    }
    let spec = match name {
        "A4" => PermSpec { degree: 4, generators: vec![vec![vec![1, 2, 3]], vec![vec![2, 3, 4]]] },
        "remark72" => remark72_spec(),
        "asl23" => asl23_spec(),
        _ => {
            let kind = name.chars().next().ok_or_else(unknown)?;
            let n = &name[kind.len_utf8()..];
            let n: usize = n.parse().map_err(|_| unknown())?;
            if n == 0 {
                return Err(unknown());
            }
            match kind {
                'C' => cyclic_spec(n),
                'D' => dihedral_spec(n),
                'S' if n <= 5 => symmetric_spec(n),
                _ => return Err(unknown()),
            }
        }
    };
    FiniteGroup::from_permutations(&spec, cap)
}

fn cyclic_spec(n: usize) -> PermSpec {
    let gens = if n == 1 { vec![] } else { vec![vec![(1..=n).collect()]] };
    PermSpec { degree: n, generators: gens }
}

fn dihedral_spec(n: usize) -> PermSpec {
    match n {
        1 => cyclic_spec(2),
        2 => PermSpec { degree: 4, generators: vec![vec![vec![1, 2]], vec![vec![3, 4]]] },
        _ => {
            // rotation, then the reflection fixing point 1
            let reflection = (2..=n)
                .filter_map(|i| {
                    let j = n + 2 - i;
                    (i < j).then(|| vec![i, j])
                })
                .collect();
            PermSpec { degree: n, generators: vec![vec![(1..=n).collect()], reflection] }
        }
    }
}

fn symmetric_spec(n: usize) -> PermSpec {
    match n {
        1 => cyclic_spec(1),
        2 => cyclic_spec(2),
        _ => PermSpec { degree: n, generators: vec![vec![vec![1, 2]], vec![(1..=n).collect()]] },
    }
}

/// Affine map `p ↦ M·p + v` on F₃², as a permutation of the nine points
/// `(x, y) ↦ 1 + x + 3y`.
fn affine_images(m: [[i64; 2]; 2], v: [i64; 2]) -> Vec<u16> {
    let mut img = vec![0u16; 9];
    for y in 0..3 {
        for x in 0..3 {
            let nx = (m[0][0] * x + m[0][1] * y + v[0]).rem_euclid(3);
            let ny = (m[1][0] * x + m[1][1] * y + v[1]).rem_euclid(3);
            img[(x + 3 * y) as usize] = (nx + 3 * ny) as u16;
        }
    }
    img
}

fn images_to_cycles(img: &[u16]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; img.len()];
    let mut cycles = Vec::new();
    for s in 0..img.len() {
        if seen[s] || img[s] as usize == s {
            continue;
        }
        let mut c = vec![s + 1];
        seen[s] = true;
        let mut j = img[s] as usize;
        while j != s {
            seen[j] = true;
            c.push(j + 1);
            j = img[j] as usize;
        }
        cycles.push(c);
    }
    cycles
}

const IDENTITY_2X2: [[i64; 2]; 2] = [[1, 0], [0, 1]];
const SWAP: [[i64; 2]; 2] = [[0, 1], [1, 0]];
const NEGATE_SECOND: [[i64; 2]; 2] = [[1, 0], [0, -1]];

fn remark72_spec() -> PermSpec {
    PermSpec {
        degree: 9,
        generators: vec![
            images_to_cycles(&affine_images(IDENTITY_2X2, [1, 0])),
            images_to_cycles(&affine_images(SWAP, [0, 0])),
            images_to_cycles(&affine_images(NEGATE_SECOND, [0, 0])),
        ],
    }
}

fn asl23_spec() -> PermSpec {
    PermSpec {
        degree: 9,
        generators: vec![
            images_to_cycles(&affine_images(IDENTITY_2X2, [1, 0])),
            images_to_cycles(&affine_images([[1, 1], [0, 1]], [0, 0])),
            images_to_cycles(&affine_images([[1, 0], [1, 1]], [0, 0])),
        ],
    }
}

/// Distinguished elements of `remark72`.
#[derive(Clone, Debug)]
pub struct Remark72 {
    pub group: FiniteGroup,
    /// `translations[i][j]` is the element `(i, j)` of C₃×C₃.
    pub translations: [[Elem; 3]; 3],
    /// The component swap.
    pub a: Elem,
    /// Negation of the second component.
    pub b: Elem,
}

pub fn remark72() -> Remark72 {
    let group = builtin("remark72").expect("catalog group builds");
    let find = |img: Vec<u16>| {
        let label = cycle_notation(&img);
        group.elements().find(|&e| group.label(e) == label).expect("element present")
    };
    let mut translations = [[Elem(0); 3]; 3];
    for (i, row) in translations.iter_mut().enumerate() {
        for (j, t) in row.iter_mut().enumerate() {
            *t = find(affine_images(IDENTITY_2X2, [i as i64, j as i64]));
        }
    }
    let a = find(affine_images(SWAP, [0, 0]));
    let b = find(affine_images(NEGATE_SECOND, [0, 0]));
    Remark72 { group, translations, a, b }
}
