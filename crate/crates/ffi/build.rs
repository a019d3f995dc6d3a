use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").expect("set by cargo"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config = cbindgen::Config::from_file(dir.join("cbindgen.toml")).expect("readable cbindgen.toml");
    let bindings = cbindgen::Builder::new()
        .with_crate(&dir)
        .with_config(config)
        .generate()
        .expect("header generation");
    let header = dir.join("include/pdf_remediate.h");
    let mut out = Vec::new();
    bindings.write(&mut out);
    // leave the file alone when nothing changed so dependents do not rebuild
    if std::fs::read(&header).ok().as_deref() != Some(out.as_slice()) {
        std::fs::create_dir_all(header.parent().expect("has parent")).expect("include dir");
        std::fs::write(&header, out).expect("header write");
    }
}
