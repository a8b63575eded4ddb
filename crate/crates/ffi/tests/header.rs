use std::path::PathBuf;
use std::process::Command;

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("arff.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct ArffDataset ArffDataset;",
        "typedef struct ArffModel ArffModel;",
        "ARFF_STATUS_OK = 0",
        "ARFF_STATUS_CONFIG = 3",
        "ARFF_STATUS_DATA = 4",
        "ARFF_STATUS_NUMERICAL = 5",
        "arff_dataset_new",
        "arff_dataset_free",
        "arff_sampler_params_default",
        "arff_train",
        "arff_model_free",
        "arff_model_predict",
        "arff_model_num_features",
        "arff_model_dim",
        "arff_model_outputs",
        "arff_generalization_error",
        "arff_last_error_message",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(header())
        .status()
    else {
        eprintln!("no C compiler, skipped");
        return;
    };
    assert!(status.success());
}
