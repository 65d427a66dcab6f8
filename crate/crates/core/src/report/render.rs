//! Deterministic rendering of a fidelity report to Markdown, CSV and SVG.
//!
//! All numbers in the human-readable files print with fixed precision and
//! all collections are ordered, so the same report always renders to the
//! same bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{FidelityReport, NerGraphSection, ReportError, Section};
use crate::nergraph::{adherence_csv, csv_escape, AdherenceColor};

fn write_file(out_dir: &Path, name: &str, contents: &str) -> Result<PathBuf, ReportError> {
    let path = out_dir.join(name);
    std::fs::write(&path, contents).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

/// Render `report.json`, `report.md`, the per-metric CSV tables and the
/// adherence SVG heat strips into `out_dir`. Returns the files written.
pub fn render_report_files(
    report: &FidelityReport,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();

    written.push(write_file(out_dir, "report.json", &report.to_json())?);
    written.push(write_file(out_dir, "report.md", &render_markdown(report))?);
    written.push(write_file(
        out_dir,
        "manifest.json",
        &serde_json::to_string_pretty(&report.manifest).expect("manifest serializes"),
    )?);

    if let Some(traits) = report.traits.as_computed() {
        let mut csv = String::from("group,source,hashtags,mentions,urls,emojis\n");
        for row in &traits.rows {
            let _ = writeln!(
                csv,
                "{},real,{:.6},{:.6},{:.6},{:.6}",
                csv_escape(&row.group),
                row.real.hashtags,
                row.real.mentions,
                row.real.urls,
                row.real.emojis
            );
        }
        for row in &traits.rows {
            let _ = writeln!(
                csv,
                "{},synthetic,{:.6},{:.6},{:.6},{:.6}",
                csv_escape(&row.group),
                row.synthetic.hashtags,
                row.synthetic.mentions,
                row.synthetic.urls,
                row.synthetic.emojis
            );
        }
        written.push(write_file(out_dir, "traits.csv", &csv)?);
    }

    if let Some(sentiment) = report.sentiment.as_computed() {
        let mut csv = String::from("corpus,positive,neutral,negative\n");
        let _ = writeln!(
            csv,
            "real,{:.4},{:.4},{:.4}",
            sentiment.real.positive, sentiment.real.neutral, sentiment.real.negative
        );
        let _ = writeln!(
            csv,
            "synthetic,{:.4},{:.4},{:.4}",
            sentiment.synthetic.positive,
            sentiment.synthetic.neutral,
            sentiment.synthetic.negative
        );
        written.push(write_file(out_dir, "sentiment.csv", &csv)?);
    }

    if let Some(topics) = report.topics.as_computed() {
        let mut csv = String::from("real_id,synthetic_id,similarity\n");
        for pair in &topics.overlap.common {
            let _ = writeln!(
                csv,
                "{},{},{:.6}",
                pair.real_id, pair.synthetic_id, pair.similarity
            );
        }
        written.push(write_file(out_dir, "topic_overlap.csv", &csv)?);

        let mut csv = String::from("avg,std,min,max,pairs\n");
        let s = &topics.space;
        let _ = writeln!(
            csv,
            "{:.6},{:.6},{:.6},{:.6},{}",
            s.avg, s.std, s.min, s.max, s.pair_count
        );
        written.push(write_file(out_dir, "topic_space.csv", &csv)?);
    }

    if let Some(similarity) = report.similarity.as_computed() {
        let mut csv =
            String::from("avg_similarity,high_count,fair_count,real_count,synthetic_count\n");
        let _ = writeln!(
            csv,
            "{:.6},{},{},{},{}",
            similarity.average,
            similarity.high_count,
            similarity.fair_count,
            similarity.real_count,
            similarity.synthetic_count
        );
        written.push(write_file(out_dir, "similarity.csv", &csv)?);
    }

    if let Some(centroids) = report.centroids.as_computed() {
        let mut csv = String::from("corpus,x,y\n");
        for (label, x, y) in &centroids.rows {
            let _ = writeln!(csv, "{label},{x:.6},{y:.6}");
        }
        written.push(write_file(out_dir, "centroids.csv", &csv)?);
    }

    if let Some(entities) = report.entities.as_computed() {
        let mut csv = String::from("graph,class,posts,edges\n");
        for (graph, stats) in [
            ("real", &entities.real_stats),
            ("synthetic", &entities.synthetic_stats),
        ] {
            let _ = writeln!(csv, "{graph},white,{},", stats.white_count);
            for ((class, posts), (_, edges)) in
                stats.posts_per_class.iter().zip(&stats.edges_per_class)
            {
                let _ = writeln!(csv, "{graph},{},{posts},{edges}", csv_escape(class));
            }
        }
        written.push(write_file(out_dir, "graph_stats.csv", &csv)?);
        written.push(write_file(
            out_dir,
            "adherence_top.csv",
            &adherence_csv(&entities.top_common),
        )?);
        written.push(write_file(
            out_dir,
            "adherence_bottom.csv",
            &adherence_csv(&entities.bottom_common),
        )?);
        written.push(write_file(
            out_dir,
            "adherence_top.svg",
            &heat_strip_svg("Top common entities", &entities.top_common),
        )?);
        written.push(write_file(
            out_dir,
            "adherence_bottom.svg",
            &heat_strip_svg("Bottom common entities", &entities.bottom_common),
        )?);
    }

    Ok(written)
}

fn render_markdown(report: &FidelityReport) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Fidelity Report\n");
    let m = &report.manifest;
    let _ = writeln!(md, "- seed: {}", m.seed);
    let _ = writeln!(md, "- strategy: {}", m.strategy);
    let _ = writeln!(md, "- config hash: `{}`", m.config_hash);
    let _ = writeln!(
        md,
        "- corpora: {} real posts, {} synthetic posts",
        m.real_posts, m.synthetic_posts
    );
    for (role, label) in &m.provider_labels {
        let _ = writeln!(md, "- {role} provider: {label}");
    }
    let _ = writeln!(md);

    let _ = writeln!(md, "## Platform Traits\n");
    match &report.traits {
        Section::Skipped { reason } => {
            let _ = writeln!(md, "_Skipped: {reason}_\n");
        }
        Section::Computed { data } => {
            let _ = writeln!(md, "| Group | Source | Hashtags | Mentions | URLs | Emojis |");
            let _ = writeln!(md, "|---|---|---|---|---|---|");
            for row in &data.rows {
                let _ = writeln!(
                    md,
                    "| {} | real | {:.2} | {:.2} | {:.2} | {:.2} |",
                    row.group, row.real.hashtags, row.real.mentions, row.real.urls, row.real.emojis
                );
            }
            for row in &data.rows {
                let _ = writeln!(
                    md,
                    "| {} | synthetic | {:.2} | {:.2} | {:.2} | {:.2} |",
                    row.group,
                    row.synthetic.hashtags,
                    row.synthetic.mentions,
                    row.synthetic.urls,
                    row.synthetic.emojis
                );
            }
            let _ = writeln!(md);
            let _ = writeln!(md, "Deltas (synthetic − real):\n");
            let _ = writeln!(md, "| Group | Hashtags | Mentions | URLs | Emojis |");
            let _ = writeln!(md, "|---|---|---|---|---|");
            for row in &data.rows {
                let _ = writeln!(
                    md,
                    "| {} | {:+.2} | {:+.2} | {:+.2} | {:+.2} |",
                    row.group,
                    row.delta.hashtags,
                    row.delta.mentions,
                    row.delta.urls,
                    row.delta.emojis
                );
            }
            let _ = writeln!(md);
        }
    }

    let _ = writeln!(md, "## Sentiment\n");
    match &report.sentiment {
        Section::Skipped { reason } => {
            let _ = writeln!(md, "_Skipped: {reason}_\n");
        }
        Section::Computed { data } => {
            let _ = writeln!(md, "Classifier: {}\n", data.classifier);
            let _ = writeln!(md, "| Corpus | Positive | Neutral | Negative |");
            let _ = writeln!(md, "|---|---|---|---|");
            let _ = writeln!(
                md,
                "| real | {:.1} | {:.1} | {:.1} |",
                data.real.positive, data.real.neutral, data.real.negative
            );
            let _ = writeln!(
                md,
                "| synthetic | {:.1} | {:.1} | {:.1} |",
                data.synthetic.positive, data.synthetic.neutral, data.synthetic.negative
            );
            let _ = writeln!(md);
        }
    }

    let _ = writeln!(md, "## Topics\n");
    match &report.topics {
        Section::Skipped { reason } => {
            let _ = writeln!(md, "_Skipped: {reason}_\n");
        }
        Section::Computed { data } => {
            let _ = writeln!(
                md,
                "{} real topics, {} synthetic topics; threshold {:.2}.\n",
                data.real_topic_count, data.synthetic_topic_count, data.overlap.threshold
            );
            let _ = writeln!(
                md,
                "- common topic pairs: {}\n- unique real: {}\n- unique synthetic: {}\n",
                data.overlap.common.len(),
                data.overlap.unique_real.len(),
                data.overlap.unique_synthetic.len()
            );
            if !data.overlap.common.is_empty() {
                let _ = writeln!(md, "| Real topic | Synthetic topic | Cosine |");
                let _ = writeln!(md, "|---|---|---|");
                for pair in &data.overlap.common {
                    let _ = writeln!(
                        md,
                        "| {} | {} | {:.4} |",
                        pair.real_id, pair.synthetic_id, pair.similarity
                    );
                }
                let _ = writeln!(md);
            }
            let _ = writeln!(md, "Topic-space distances (jointly reduced 2-D):\n");
            let _ = writeln!(md, "| Avg | Std Dev | Min | Max |");
            let _ = writeln!(md, "|---|---|---|---|");
            let s = &data.space;
            let _ = writeln!(
                md,
                "| {:.2} | {:.2} | {:.2} | {:.2} |\n",
                s.avg, s.std, s.min, s.max
            );
        }
    }

    let _ = writeln!(md, "## Embedding Similarity\n");
    match &report.similarity {
        Section::Skipped { reason } => {
            let _ = writeln!(md, "_Skipped: {reason}_\n");
        }
        Section::Computed { data } => {
            let _ = writeln!(
                md,
                "| Avg. Sim. | >{:.1} | {:.1}–{:.1} | Real Count |",
                data.high_threshold, data.fair_band.0, data.fair_band.1
            );
            let _ = writeln!(md, "|---|---|---|---|");
            let _ = writeln!(
                md,
                "| {:.4} | {} | {} | {} |\n",
                data.average, data.high_count, data.fair_count, data.real_count
            );
        }
    }

    let _ = writeln!(md, "## Named Entities\n");
    match &report.entities {
        Section::Skipped { reason } => {
            let _ = writeln!(md, "_Skipped: {reason}_\n");
        }
        Section::Computed { data } => {
            render_entity_section(&mut md, data);
        }
    }

    md
}

fn render_entity_section(md: &mut String, data: &NerGraphSection) {
    let _ = writeln!(md, "Mode: {}\n", data.mode);
    let _ = writeln!(md, "| Graph | Class | Posts | Edges |");
    let _ = writeln!(md, "|---|---|---|---|");
    for (graph, stats) in [("real", &data.real_stats), ("synthetic", &data.synthetic_stats)] {
        let _ = writeln!(md, "| {graph} | white | {} | |", stats.white_count);
        for ((class, posts), (_, edges)) in
            stats.posts_per_class.iter().zip(&stats.edges_per_class)
        {
            let _ = writeln!(md, "| {graph} | {class} | {posts} | {edges} |");
        }
    }
    let _ = writeln!(md);
    for (name, colors) in [
        ("Top-20 common entities", &data.top_common),
        ("Bottom-20 common entities", &data.bottom_common),
    ] {
        let _ = writeln!(md, "### {name}\n");
        let _ = writeln!(md, "| Entity | R | G | B |");
        let _ = writeln!(md, "|---|---|---|---|");
        for c in colors.iter() {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} |",
                c.entity, c.rgb[0], c.rgb[1], c.rgb[2]
            );
        }
        let _ = writeln!(md);
    }
}

/// One row of colored cells, white = perfect adherence, with entity names
/// as hover titles and truncated labels beneath.
fn heat_strip_svg(title: &str, colors: &[AdherenceColor]) -> String {
    const CELL: usize = 42;
    const HEIGHT: usize = 72;
    let width = (colors.len().max(1)) * CELL + 20;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{HEIGHT}" viewBox="0 0 {width} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"  <text x="10" y="14" font-size="11" font-family="sans-serif">{}</text>"#, xml_escape(title));
    for (i, c) in colors.iter().enumerate() {
        let x = 10 + i * CELL;
        let _ = writeln!(
            svg,
            r##"  <rect x="{x}" y="20" width="{CELL}" height="28" fill="rgb({},{},{})" stroke="#444" stroke-width="0.5"><title>{} ({},{},{})</title></rect>"##,
            c.rgb[0],
            c.rgb[1],
            c.rgb[2],
            xml_escape(&c.entity),
            c.rgb[0],
            c.rgb[1],
            c.rgb[2]
        );
        let label: String = c.entity.chars().take(6).collect();
        let _ = writeln!(
            svg,
            r#"  <text x="{}" y="62" font-size="8" font-family="sans-serif" text-anchor="middle">{}</text>"#,
            x + CELL / 2,
            xml_escape(&label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
