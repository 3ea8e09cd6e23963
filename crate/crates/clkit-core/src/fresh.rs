use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;

/// Returns `base` if it is not taken, otherwise `base_2`, `base_3`, ...
/// The returned name is inserted into `taken`.
pub(crate) fn fresh_name(base: &str, taken: &mut BTreeSet<String>) -> String {
    let mut name = String::from(base);
    let mut k = 2usize;
    while taken.contains(&name) {
        name = format!("{base}_{k}");
        k += 1;
    }
    taken.insert(name.clone());
    name
}
