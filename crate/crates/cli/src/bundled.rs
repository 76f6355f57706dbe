//! Lattice specs shipped with the binary, addressable by name.

pub const LATTICES: &[(&str, &str)] = &[
    ("ex1_alternating", include_str!("../configs/ex1_alternating.toml")),
    ("ex2_hexagonal_weighted", include_str!("../configs/ex2_hexagonal_weighted.toml")),
    ("square_2a", include_str!("../configs/square_2a.toml")),
    ("square_2b", include_str!("../configs/square_2b.toml")),
    ("hexagonal_3a", include_str!("../configs/hexagonal_3a.toml")),
    ("line_1a", include_str!("../configs/line_1a.toml")),
    ("line_1b", include_str!("../configs/line_1b.toml")),
];

pub fn lattice(name: &str) -> Option<&'static str> {
    LATTICES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
