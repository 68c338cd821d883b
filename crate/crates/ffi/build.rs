fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = std::path::Path::new(&crate_dir).join("include").join("crithom.h");
    std::fs::create_dir_all(header.parent().unwrap()).unwrap();
    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.include_guard = Some("CRITHOM_H".into());
    config.cpp_compat = true;
    config.enumeration.prefix_with_name = true;
    match cbindgen::Builder::new().with_crate(&crate_dir).with_config(config).generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        Err(err) => {
            // Header generation is best-effort at build time; a stale
            // header is preferable to a broken build.
            println!("cargo:warning=cbindgen failed: {err}");
        }
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
}
