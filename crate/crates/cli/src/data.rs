use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use msdhmm::skeleton::{load_msr_dataset, MsrDataset, MSR_ACTION3D_CLASSES};
use msdhmm::{Error, SkeletonDescriptor};
use sha2::{Digest, Sha256};

pub const CLASS_FILE: &str = "classes.txt";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Loads a dataset directory and the class names that go with it.
pub fn load(
    dir: &Path,
    descriptor: &SkeletonDescriptor,
    allowlist: Option<&Path>,
) -> msdhmm::Result<(MsrDataset, BTreeMap<u32, String>)> {
    if !dir.is_dir() {
        return Err(Error::Input(format!("dataset directory {} not found", dir.display())));
    }
    let dataset = load_msr_dataset(dir, descriptor, allowlist)?;
    let names = class_names(dir, descriptor)?;
    Ok((dataset, names))
}

/// Names from `classes.txt` (`id name` per line) when present, the
/// MSRAction3D names for that layout, nothing otherwise.
pub fn class_names(dir: &Path, descriptor: &SkeletonDescriptor) -> msdhmm::Result<BTreeMap<u32, String>> {
    let path = dir.join(CLASS_FILE);
    if path.is_file() {
        return parse_class_names(&fs::read_to_string(&path)?, &path);
    }
    if descriptor.name() == "msr-action3d" {
        return Ok(MSR_ACTION3D_CLASSES
            .iter()
            .enumerate()
            .map(|(i, n)| (i as u32 + 1, (*n).to_owned()))
            .collect());
    }
    Ok(BTreeMap::new())
}

pub fn parse_class_names(text: &str, path: &Path) -> msdhmm::Result<BTreeMap<u32, String>> {
    let mut names = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: message.to_owned(),
        };
        let (id, name) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| err("expected `id name`"))?;
        let id: u32 = id.parse().map_err(|_| err("class id is not an integer"))?;
        if names.insert(id, name.trim().to_owned()).is_some() {
            return Err(err("class id listed twice"));
        }
    }
    Ok(names)
}

pub fn write_class_names(names: &[(u32, String)]) -> String {
    names.iter().map(|(id, n)| format!("{id} {n}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_file_parses_and_rejects_duplicates() {
        let p = Path::new("classes.txt");
        let names = parse_class_names("# header\n1 swipe right\n2 push\n", p).unwrap();
        assert_eq!(names[&1], "swipe right");
        assert_eq!(names.len(), 2);
        assert!(parse_class_names("1 a\n1 b\n", p).is_err());
        assert!(parse_class_names("x a\n", p).is_err());
        let text = write_class_names(&[(1, "a".into()), (4, "b c".into())]);
        assert_eq!(parse_class_names(&text, p).unwrap()[&4], "b c");
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
