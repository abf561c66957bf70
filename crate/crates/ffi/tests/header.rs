use std::path::Path;
use std::process::Command;

/// The generated header compiles as C and C++ (skipped without a compiler).
#[test]
fn header_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/steinis.h");
    assert!(header.exists(), "header not generated");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"steinis.h\"\nint main(void) {\n  SteinisGram *g = 0;\n  double e[1] = {2.0};\n  \
         SteinisStatus s = steinis_gram_from_entries(1, e, &g);\n  steinis_gram_free(g);\n  return (int)s;\n}\n",
    )
    .unwrap();
    let include = header.parent().unwrap();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(status) = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg("-I")
            .arg(include)
            .arg(&src)
            .status()
        else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(status.success(), "{compiler} rejected the header");
    }
}
