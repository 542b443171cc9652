//! Run an experiment from an in-memory config and read back its outputs.

use contractlab::harness::{run, ExperimentConfig};

fn main() -> contractlab::Result<()> {
    let out = std::env::temp_dir().join("contractlab-example");
    let text = format!(
        "[experiment]\n\
         model = white-noise\n\
         alpha = 0.75\n\
         r = 1, 2, inf\n\
         n_list = 2^10..2^16:2\n\
         reps = 50\n\
         seed = 4\n\
         output_path = {}\n",
        out.join("white_noise").display()
    );
    let cfg = ExperimentConfig::from_str_ini(&text)?;
    let files = run(&cfg, 2)?;
    println!("{} rows -> {}", files.rows, files.csv.display());
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files.json)?)?;
    for (r, fit) in summary["fits"].as_object().into_iter().flatten() {
        println!(
            "r={r}: slope {:.3}",
            fit["slope"].as_f64().unwrap_or(f64::NAN)
        );
    }
    print!(
        "{}",
        std::fs::read_to_string(&files.csv)?
            .lines()
            .take(3)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!();
    Ok(())
}
