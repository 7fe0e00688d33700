fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let out = std::path::Path::new(&crate_dir).join("include").join("combicheck.h");
    std::fs::create_dir_all(out.parent().unwrap()).unwrap();
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("COMBICHECK_H")
        .with_cpp_compat(true)
        .generate()
        .expect("cbindgen header generation")
        .write_to_file(out);
    println!("cargo:rerun-if-changed=src/lib.rs");
}
