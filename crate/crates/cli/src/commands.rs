use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use radiomics::phantom::{generate_pair, PhantomShape, PhantomSpec};
use radiomics::quantization::QuantizationSpec;
use radiomics::repeatability::{repeatability_report, PairedSeries};
use radiomics::volume_io::{load_mask, load_volume, save_mask, save_volume, DType, Format};
use radiomics::{extract_features, FeatureVector, Unit};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::report_io::ReportFile;
use crate::svg::bland_altman_svg;
use crate::table::{write_file, FeatureTable};

#[derive(Debug, Parser)]
#[command(name = "radiomics", version, about = "Radiomics feature extraction and test-retest repeatability")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract features for one or more lesions into a feature table.
    Extract(ExtractArgs),
    /// Compare test and retest feature tables.
    Compare(CompareArgs),
    /// Generate synthetic test-retest phantoms.
    Phantom(PhantomArgs),
    /// Re-render Bland-Altman plots from an existing report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Modality {
    Pet,
    Ct,
}

impl Modality {
    fn unit(self) -> Unit {
        match self {
            Modality::Pet => Unit::Suv,
            Modality::Ct => Unit::Hu,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Intensity volume (.nrrd, .nhdr or .json sidecar); repeat per lesion.
    #[arg(long = "image", required = true)]
    pub images: Vec<PathBuf>,
    /// Binary mask matching each image.
    #[arg(long = "mask", required = true)]
    pub masks: Vec<PathBuf>,
    /// Lesion id per image; defaults to the image file stem.
    #[arg(long = "id")]
    pub ids: Vec<String>,
    /// `bins:<B>` or `width:<W>`; bare `bins` / `width` take the defaults.
    /// Repeatable. Without any, both schemes run.
    #[arg(long = "quant")]
    pub quants: Vec<String>,
    #[arg(long, value_enum, default_value = "pet")]
    pub modality: Modality,
    /// Output stem; writes <stem>.csv, <stem>.json and <stem>.manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub retest: PathBuf,
    /// Feature whose SD sets the reliability thresholds.
    #[arg(long, default_value = "shape.volume_ml")]
    pub voi_feature: String,
    /// Feature used for the intensity correlation column.
    #[arg(long, default_value = "fo.max")]
    pub max_feature: String,
    /// Feature to plot; repeatable.
    #[arg(long = "plot")]
    pub plots: Vec<String>,
    /// Output stem; writes <stem>.csv, <stem>.json, <stem>.manifest.json and
    /// <stem>.<feature>.svg per plot.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Nrrd,
    Raw,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// JSON phantom spec; flags given alongside override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub spacing: Option<Vec<f64>>,
    #[arg(long)]
    pub shape: Option<String>,
    /// Radius in voxels.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub base_intensity: Option<f64>,
    #[arg(long)]
    pub texture_scale: Option<f64>,
    #[arg(long)]
    pub texture_sd: Option<f64>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of lesions; lesion k uses seed + k.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long, value_enum, default_value = "nrrd")]
    pub format: OutputFormat,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report JSON written by `compare`.
    #[arg(long)]
    pub report: PathBuf,
    /// Feature to plot; repeatable. Without any, every feature is plotted.
    #[arg(long = "plot")]
    pub plots: Vec<String>,
    /// Output stem for the plots; defaults to the report path without
    /// extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Extract(a) => extract(&a),
        Command::Compare(a) => compare(&a),
        Command::Phantom(a) => phantom(&a),
        Command::Report(a) => report(&a),
    }
}

/// `<stem>` with any `.csv` / `.json` extension removed.
fn stem(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv" | "json") => path.with_extension(""),
        _ => path.to_path_buf(),
    }
}

fn sibling(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    stem.with_file_name(name)
}

fn parse_quant(s: &str, modality: Modality) -> CliResult<QuantizationSpec> {
    match s.trim() {
        "bins" => Ok(QuantizationSpec::fixed_bins(radiomics::quantization::DEFAULT_BINS)?),
        "width" => Ok(QuantizationSpec::default_width(modality.unit())),
        other => other
            .parse()
            .map_err(|e: radiomics::Error| CliError::input(e.to_string())),
    }
}

fn extract(a: &ExtractArgs) -> CliResult<()> {
    if a.images.len() != a.masks.len() {
        return Err(CliError::input(format!(
            "{} images but {} masks",
            a.images.len(),
            a.masks.len()
        )));
    }
    if !a.ids.is_empty() && a.ids.len() != a.images.len() {
        return Err(CliError::input(format!("{} ids for {} images", a.ids.len(), a.images.len())));
    }
    let quants = if a.quants.is_empty() {
        vec![
            QuantizationSpec::fixed_bins(radiomics::quantization::DEFAULT_BINS)?,
            QuantizationSpec::default_width(a.modality.unit()),
        ]
    } else {
        a.quants
            .iter()
            .map(|q| parse_quant(q, a.modality))
            .collect::<CliResult<Vec<_>>>()?
    };
    let ids: Vec<String> = if a.ids.is_empty() {
        a.images
            .iter()
            .map(|p| {
                let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                name.split('.').next().unwrap_or_default().to_string()
            })
            .collect()
    } else {
        a.ids.clone()
    };
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(CliError::input(format!("duplicate lesion id {dup:?}")));
    }

    let mut manifest = RunManifest::new("extract");
    for (img, mask) in a.images.iter().zip(&a.masks) {
        manifest.add_input(img)?;
        manifest.add_input(mask)?;
    }
    manifest.quantizations = quants.iter().map(|q| q.to_string()).collect();
    manifest.lesion_ids = ids.clone();
    manifest.parameters = serde_json::json!({ "modality": format!("{:?}", a.modality).to_lowercase() });

    let vectors: Vec<FeatureVector> = (0..ids.len())
        .into_par_iter()
        .map(|i| -> CliResult<FeatureVector> {
            let img = &a.images[i];
            let format = Format::detect(img)
                .ok_or_else(|| CliError::input("unrecognised image extension").at(img))?;
            let volume = load_volume(img, format).map_err(|e| CliError::from(e).at(img))?;
            let mask = load_mask(&a.masks[i]).map_err(|e| CliError::from(e).at(&a.masks[i]))?;
            extract_features(&ids[i], &volume, &mask, &quants).map_err(|e| {
                let mut err = CliError::from(e);
                err.message = format!("lesion {}: {}", ids[i], err.message);
                err.at(img)
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let out = stem(&a.out);
    let table = FeatureTable::from_vectors(manifest.hash(), &vectors)?;
    table.write(&out)?;
    manifest.write(&sibling(&out, ".manifest.json"))
}

fn compare(a: &CompareArgs) -> CliResult<()> {
    let test = FeatureTable::read(&a.test)?;
    let retest = FeatureTable::read(&a.retest)?;
    let test_ids: Vec<&str> = test.lesion_ids().collect();
    let missing: Vec<&str> = test_ids.iter().copied().filter(|id| retest.lesion(id).is_none()).collect();
    let extra: Vec<&str> = retest.lesion_ids().filter(|id| test.lesion(id).is_none()).collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(CliError::input(format!(
            "lesion ids differ: {missing:?} only in test, {extra:?} only in retest"
        ))
        .at(&a.retest));
    }
    if test_ids.len() < 3 {
        return Err(CliError::input(format!(
            "need at least 3 common lesions, found {}",
            test_ids.len()
        )));
    }
    if test.feature_ids != retest.feature_ids {
        return Err(CliError::input("test and retest tables have different feature columns").at(&a.retest));
    }
    for needed in [&a.voi_feature, &a.max_feature].into_iter().chain(&a.plots) {
        if test.column_index(needed).is_none() {
            return Err(CliError::input(format!("feature {needed} not in tables")));
        }
    }

    let series = test
        .feature_ids
        .iter()
        .enumerate()
        .map(|(col, id)| {
            let t = test.lesions.iter().map(|l| l.values[col]).collect();
            let r = test_ids.iter().map(|lid| retest.lesion(lid).unwrap().values[col]).collect();
            PairedSeries::new(id.clone(), t, r).map_err(CliError::from)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let report = repeatability_report(&series, &a.voi_feature, &a.max_feature)?;

    let mut manifest = RunManifest::new("compare");
    manifest.add_input(&a.test)?;
    manifest.add_input(&a.retest)?;
    manifest.lesion_ids = test_ids.iter().map(|s| s.to_string()).collect();
    manifest.parameters = serde_json::json!({
        "voi_feature": a.voi_feature,
        "max_feature": a.max_feature,
        "plots": a.plots,
    });
    let file = ReportFile {
        manifest_hash: manifest.hash(),
        lesion_ids: manifest.lesion_ids.clone(),
        report,
    };
    let out = stem(&a.out);
    file.write(&out)?;
    write_plots(&file, &a.plots, &out)?;
    manifest.write(&sibling(&out, ".manifest.json"))
}

fn plot_path(stem: &Path, feature_id: &str) -> PathBuf {
    let safe: String = feature_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._@-".contains(c) { c } else { '_' })
        .collect();
    sibling(stem, &format!(".{safe}.svg"))
}

fn write_plots(file: &ReportFile, features: &[String], stem: &Path) -> CliResult<()> {
    for id in features {
        let (Some(row), Some(points)) = (file.report.row(id), file.report.points(id)) else {
            return Err(CliError::input(format!("feature {id} not in report")));
        };
        write_file(&plot_path(stem, id), &bland_altman_svg(points, row))?;
    }
    Ok(())
}

fn report(a: &ReportArgs) -> CliResult<()> {
    let file = ReportFile::read_json(&a.report)?;
    let features: Vec<String> = if a.plots.is_empty() {
        file.report.rows.iter().map(|r| r.feature_id.clone()).collect()
    } else {
        a.plots.clone()
    };
    let out = a.out.clone().unwrap_or_else(|| stem(&a.report));
    write_plots(&file, &features, &out)
}

fn phantom_spec(a: &PhantomArgs) -> CliResult<PhantomSpec> {
    let mut spec = match &a.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())).at(path))?
        }
        None => PhantomSpec::default(),
    };
    if let Some(d) = &a.dims {
        spec.dims = [d[0], d[1], d[2]];
    }
    if let Some(s) = &a.spacing {
        spec.spacing = [s[0], s[1], s[2]];
    }
    if let Some(s) = &a.shape {
        spec.shape = s.parse::<PhantomShape>()?;
    }
    if let Some(r) = a.radius {
        spec.radius_vox = r;
        if a.dims.is_none() && a.spec.is_none() {
            let n = (2.0 * r).ceil() as usize + 8;
            spec.dims = [n; 3];
        }
    }
    if let Some(v) = a.base_intensity {
        spec.base_intensity = v;
    }
    if let Some(v) = a.texture_scale {
        spec.texture_scale = v;
    }
    if a.texture_sd.is_some() {
        spec.texture_sd = a.texture_sd;
    }
    if let Some(v) = a.noise_sd {
        spec.noise_sd = v;
    }
    if let Some(v) = a.seed {
        spec.seed = v;
    }
    spec.validate()?;
    Ok(spec)
}

fn phantom(a: &PhantomArgs) -> CliResult<()> {
    let spec = phantom_spec(a)?;
    if a.count == 0 {
        return Err(CliError::input("--count must be at least 1"));
    }
    let (format, ext) = match a.format {
        OutputFormat::Nrrd => (Format::Nrrd, "nrrd"),
        OutputFormat::Raw => (Format::RawJson, "json"),
    };
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let mut manifest = RunManifest::new("phantom");
    for k in 0..a.count {
        let lesion = PhantomSpec {
            seed: spec.seed.wrapping_add(k),
            ..spec.clone()
        };
        let id = format!("phantom{}", lesion.seed);
        let pair = generate_pair(&lesion)?;
        for (session, volume) in [("test", &pair.test), ("retest", &pair.retest)] {
            let vol_path = a.out_dir.join(format!("{id}_{session}_volume.{ext}"));
            let mask_path = a.out_dir.join(format!("{id}_{session}_mask.{ext}"));
            save_volume(&vol_path, volume, format, DType::F64).map_err(|e| CliError::from(e).at(&vol_path))?;
            save_mask(&mask_path, &pair.mask, lesion.spacing, format).map_err(|e| CliError::from(e).at(&mask_path))?;
            manifest.add_input(&vol_path)?;
            manifest.add_input(&mask_path)?;
        }
        manifest.lesion_ids.push(id);
    }
    manifest.parameters = serde_json::to_value(&spec).expect("spec serialises");
    let spec_text = serde_json::to_string_pretty(&spec).expect("spec serialises") + "\n";
    write_file(&a.out_dir.join("phantom_spec.json"), &spec_text)?;
    manifest.write(&a.out_dir.join("manifest.json"))
}
