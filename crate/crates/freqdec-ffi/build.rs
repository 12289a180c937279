use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").expect("set by cargo"));
    let header = crate_dir.join("include").join("freqdec.h");
    std::fs::create_dir_all(header.parent().expect("include dir")).expect("create include dir");
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(
            cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
                .expect("cbindgen.toml parses"),
        )
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        // keep a previously generated header usable when generation fails
        // (e.g. during `cargo publish` dry runs)
        Err(e) => println!("cargo:warning=cbindgen failed: {e}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
