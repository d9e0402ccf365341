//! Deterministically assemble the bundled drug-like corpus.
//!
//! Molecules are built by joining ring cores through short linkers and
//! decorating them with common substituents, then filtered for size and
//! validity and deduplicated by canonical key. Output is canonical SMILES,
//! one per line, written to `crates/core/data/corpus10k.smi`.
//!
//! Run with: `cargo run -p molforge --release --example make_corpus`

use molforge::graph::{validate, Atom, Bond, MolecularGraph};
use molforge::lang::{parse_smiles, write_smiles};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TARGET: usize = 10_000;
const SEED: u64 = 20240614;

const CORES: &[&str] = &[
    "c1ccccc1",
    "c1ccncc1",
    "c1cncnc1",
    "C1CCCCC1",
    "C1CCCC1",
    "C1CCNCC1",
    "C1CNCCN1",
    "C1COCCN1",
    "C1CCOC1",
    "c1ccsc1",
    "c1ccoc1",
    "C1CCNC1",
    "c1c[nH]cn1",
    "c1cc[nH]n1",
    "c1ccc2ccccc2c1",
    "c1ccc2c(c1)cc[nH]2",
    "c1ccc2ncccc2c1",
    "C1CCC2CCCCC2C1",
    "c1cnc2[nH]ccc2c1",
    "C1COCCO1",
];

const SUBSTITUENTS: &[&str] = &[
    "C", "CC", "O", "OC", "F", "Cl", "Br", "N", "NC", "C(=O)O", "C(=O)OC", "C(=O)N", "C#N",
    "C(F)(F)F", "CC(C)C", "OCC", "C(=O)C", "S", "SC", "CO", "CN", "C(C)O",
];

/// Linkers as (smiles, left attachment atom, right attachment atom); an
/// empty string is a direct bond.
const LINKERS: &[(&str, usize, usize)] = &[
    ("", 0, 0),
    ("C", 0, 0),
    ("CC", 0, 1),
    ("O", 0, 0),
    ("N", 0, 0),
    ("S", 0, 0),
    ("C=O", 0, 0),
    ("NC(=O)", 0, 1),
    ("OC", 0, 1),
    ("NC", 0, 1),
];

/// Join `b` onto `a` with a single bond between `atom_a` and `atom_b`,
/// consuming one hydrogen on each side.
fn join(
    a: &MolecularGraph,
    atom_a: usize,
    b: &MolecularGraph,
    atom_b: usize,
) -> Option<MolecularGraph> {
    if a.atoms()[atom_a].explicit_h < 1 || b.atoms()[atom_b].explicit_h < 1 {
        return None;
    }
    let mut atoms: Vec<Atom> = a.atoms().to_vec();
    let offset = atoms.len();
    atoms.extend_from_slice(b.atoms());
    atoms[atom_a].explicit_h -= 1;
    atoms[offset + atom_b].explicit_h -= 1;
    let mut bonds: Vec<Bond> = a.bonds().to_vec();
    bonds.extend(
        b.bonds()
            .iter()
            .map(|bd| Bond::new(bd.a + offset, bd.b + offset, bd.order)),
    );
    bonds.push(Bond::new(atom_a, offset + atom_b, 1));
    MolecularGraph::new(atoms, bonds).ok()
}

fn attachable(g: &MolecularGraph, rng: &mut ChaCha8Rng) -> Option<usize> {
    let options: Vec<usize> = (0..g.atom_count())
        .filter(|&i| g.atoms()[i].explicit_h >= 1)
        .collect();
    options.choose(rng).copied()
}

fn assemble(rng: &mut ChaCha8Rng, pool: &[MolecularGraph]) -> Option<MolecularGraph> {
    let n_cores = *[1usize, 1, 1, 2, 2, 3].choose(rng).expect("non-empty");
    let mut mol = pool.choose(rng)?.clone();
    let linker_pool: Vec<(Option<MolecularGraph>, usize, usize)> = LINKERS
        .iter()
        .map(|&(s, l, r)| {
            if s.is_empty() {
                (None, l, r)
            } else {
                (Some(parse_smiles(s).expect("linker parses")), l, r)
            }
        })
        .collect();
    for _ in 1..n_cores {
        let next = pool.choose(rng)?.clone();
        let (linker, l_at, r_at) = linker_pool.choose(rng)?;
        let a_at = attachable(&mol, rng)?;
        match linker {
            None => {
                let b_at = attachable(&next, rng)?;
                mol = join(&mol, a_at, &next, b_at)?;
            }
            Some(link) => {
                let with_link = join(&mol, a_at, link, *l_at)?;
                let link_right = mol.atom_count() + *r_at;
                let b_at = attachable(&next, rng)?;
                mol = join(&with_link, link_right, &next, b_at)?;
            }
        }
    }
    let n_subst = rng.gen_range(0..=4);
    let subst_pool: Vec<MolecularGraph> = SUBSTITUENTS
        .iter()
        .map(|s| parse_smiles(s).expect("substituent parses"))
        .collect();
    for _ in 0..n_subst {
        let sub = subst_pool.choose(rng)?;
        let at = attachable(&mol, rng)?;
        mol = join(&mol, at, sub, 0)?;
    }
    Some(mol)
}

fn main() {
    let cores: Vec<MolecularGraph> = CORES
        .iter()
        .map(|s| parse_smiles(s).unwrap_or_else(|e| panic!("core {s}: {e}")))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut seen = std::collections::HashSet::new();
    let mut lines = Vec::with_capacity(TARGET);
    let mut attempts = 0u64;
    while lines.len() < TARGET {
        attempts += 1;
        let Some(mol) = assemble(&mut rng, &cores) else {
            continue;
        };
        let n = mol.atom_count();
        if !(8..=42).contains(&n) {
            continue;
        }
        if !validate(&mol).valid || !mol.is_connected() {
            continue;
        }
        if molforge::graph::molecular_weight(&mol) > 600.0 {
            continue;
        }
        let smiles = write_smiles(&mol);
        let reparsed = parse_smiles(&smiles)
            .unwrap_or_else(|e| panic!("writer output must reparse: {smiles}: {e}"));
        assert!(molforge::graph::isomorphic(&reparsed, &mol));
        if seen.insert(molforge::graph::canonical_key(&mol)) {
            lines.push(smiles);
        }
    }
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir).expect("create data dir");
    let path = dir.join("corpus10k.smi");
    std::fs::write(&path, lines.join("\n") + "\n").expect("write corpus");
    println!(
        "wrote {} molecules to {} ({} attempts)",
        lines.len(),
        path.display(),
        attempts
    );
}
