//! `molforge sal`: substructure attention level over annotated molecules.

use crate::exit::CliError;
use crate::report::write_report;
use clap::Args;
use molforge::corpus::parse_corpus_text;
use molforge::lang::{Alphabet, Token};
use molforge::metrics::{quartiles, sal, SubstructureAnnotation};
use molforge::model::{checkpoint, forward};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args)]
pub struct SalArgs {
    /// Annotation JSON: a list of {"molecule": ..., "spans": [[start, end]]}.
    pub annotations: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(short, long, default_value = "sal_report.json")]
    pub out: PathBuf,
    /// Also dump the per-molecule token attention maps.
    #[arg(long, default_value_t = false)]
    pub emit_maps: bool,
}

#[derive(Serialize)]
struct MoleculeSal {
    molecule: String,
    sal: Option<f64>,
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    attention: Option<Vec<Vec<f64>>>,
}

pub fn run(args: SalArgs) -> Result<(), CliError> {
    let (params, meta) = checkpoint::load(&args.checkpoint)?;
    let alphabet = Alphabet::from_json(
        &serde_json::to_string(&meta.alphabet).expect("strings serialize"),
    )
    .map_err(CliError::data)?;
    let text = std::fs::read_to_string(&args.annotations)
        .map_err(|e| CliError::data(format!("{}: {e}", args.annotations.display())))?;
    let annotations: Vec<SubstructureAnnotation> =
        serde_json::from_str(&text).map_err(CliError::data)?;
    if annotations.is_empty() {
        return Err(CliError::data("annotation file is empty"));
    }

    let start = alphabet.id_of(Token::Start).expect("specials");
    let end = alphabet.id_of(Token::End).expect("specials");
    type AttnRows = Vec<Vec<f64>>;
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for ann in &annotations {
        let outcome = (|| -> Result<(f64, Option<AttnRows>), String> {
            let parsed = parse_corpus_text(&ann.molecule, "annotation");
            let entry = parsed
                .entries
                .into_iter()
                .next()
                .ok_or_else(|| "molecule does not parse".to_string())?;
            let ids = alphabet
                .encode_ids(&entry.tokens)
                .ok_or_else(|| "molecule uses tokens outside the alphabet".to_string())?;
            let mut src = vec![start];
            src.extend(&ids);
            src.push(end);
            let mut dec_in = vec![start];
            dec_in.extend(&ids);
            let run = forward(&params, &src, &dec_in, true).map_err(|e| e.to_string())?;
            let mut trace = run.trace.expect("trace requested");
            // decoder columns run [prefix | <s> | molecule tokens]; fold the
            // start column into the excluded prefix mass so annotation spans
            // index molecule tokens directly and full spans score exactly 1
            for record in trace.dec_self.iter_mut() {
                record.prefix_cols += 1;
            }
            let value = sal(&trace, ann).map_err(|e| e.to_string())?;
            let maps = args.emit_maps.then(|| {
                let map = molforge::model::attention_map(&trace, trace.dec_self.len() - 1)
                    .expect("final layer exists");
                (0..map.token_weights.rows())
                    .map(|r| {
                        map.token_weights
                            .row(r)
                            .iter()
                            .map(|&w| w as f64)
                            .collect()
                    })
                    .collect()
            });
            Ok((value, maps))
        })();
        match outcome {
            Ok((v, maps)) => {
                values.push(v);
                rows.push(MoleculeSal {
                    molecule: ann.molecule.clone(),
                    sal: Some(v),
                    error: None,
                    attention: maps,
                });
            }
            Err(e) => rows.push(MoleculeSal {
                molecule: ann.molecule.clone(),
                sal: None,
                error: Some(e),
                attention: None,
            }),
        }
    }
    let summary = quartiles(&values);
    for row in &rows {
        match (row.sal, &row.error) {
            (Some(v), _) => println!("{}\t{v:.4}", row.molecule),
            (None, Some(e)) => println!("{}\tERROR: {e}", row.molecule),
            _ => {}
        }
    }
    if let Some(q) = &summary {
        println!(
            "quartiles: min {:.4} q1 {:.4} median {:.4} q3 {:.4} max {:.4}",
            q.min, q.q1, q.median, q.q3, q.max
        );
    }
    write_report(
        &args.out,
        "sal",
        None,
        serde_json::json!({
            "checkpoint": args.checkpoint.display().to_string(),
            "annotations": args.annotations.display().to_string(),
        }),
        serde_json::json!({ "molecules": rows, "quartiles": summary }),
    )?;
    Ok(())
}
