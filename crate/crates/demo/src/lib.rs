//! Wasm bindings for the in-browser demo page.
//!
//! The page drives three operations: generate a synthetic dataset, cluster
//! it with the blocked pipeline (single worker inside the wasm thread), and
//! read back the vectors needed to draw the scatter and the rho/delta
//! decision graph. All state lives in [`Demo`]; JavaScript only shuttles
//! typed arrays to the canvas.
//!
//! The `*_impl` methods carry the logic with plain `String` errors so they
//! stay testable on native targets; the exported wrappers translate errors
//! to `JsValue` for the browser.

use wasm_bindgen::prelude::*;

use faithdp::datagen::{five_spirals_with, gaussian_blobs, SpiralParams};
use faithdp::{
    run_pipeline, ClusterCount, DataMatrix, DcMode, DistanceSource, Kernel, PipelineOutput,
    RunConfig,
};

#[wasm_bindgen]
pub struct Demo {
    data: Option<DataMatrix>,
    truth: Vec<u32>,
    run: Option<PipelineOutput>,
}

impl Default for Demo {
    fn default() -> Self {
        Self::new()
    }
}

impl Demo {
    fn generate_impl(
        &mut self,
        kind: &str,
        n: usize,
        noise: f64,
        seed: u64,
    ) -> Result<Vec<f64>, String> {
        let (data, truth) = match kind {
            "spirals5" => {
                let params = SpiralParams {
                    noise_sigma: noise,
                    ..SpiralParams::default()
                };
                five_spirals_with(n, &params, seed).map_err(|e| e.to_string())?
            }
            "blobs" => {
                gaussian_blobs(n, 5, 2, 10.0, 0.6 + noise * 8.0, seed).map_err(|e| e.to_string())?
            }
            other => return Err(format!("unknown dataset kind `{other}`")),
        };
        let coords = data.values().to_vec();
        self.data = Some(data);
        self.truth = truth;
        self.run = None;
        Ok(coords)
    }

    fn cluster_impl(
        &mut self,
        kernel: &str,
        dc_percentile: f64,
        k: usize,
        clusters: usize,
        batch: usize,
    ) -> Result<Vec<u32>, String> {
        let data = self
            .data
            .as_ref()
            .ok_or_else(|| "generate a dataset first".to_string())?;
        let config = RunConfig {
            kernel: match kernel {
                "gaussian" => Kernel::Gaussian,
                "cutoff" => Kernel::Cutoff,
                other => return Err(format!("unknown kernel `{other}`")),
            },
            dc: DcMode::Percentile(dc_percentile),
            k,
            batch_size: batch.max(1),
            // Wasm has no threads; the pipeline runs its windows inline.
            workers: Some(1),
            clusters: if clusters == 0 {
                ClusterCount::Auto
            } else {
                ClusterCount::Explicit(clusters)
            },
            seed: 42,
        };
        let source = DistanceSource::euclidean(data.clone());
        let out = run_pipeline(&source, &config).map_err(|e| e.to_string())?;
        let labels = out.result.labels.clone();
        self.run = Some(out);
        Ok(labels)
    }

    fn scores_impl(&self) -> Result<Vec<f64>, String> {
        let run = self.run.as_ref().ok_or_else(|| "no run yet".to_string())?;
        let nmi =
            faithdp::metrics::nmi(&run.result.labels, &self.truth).map_err(|e| e.to_string())?;
        let ari =
            faithdp::metrics::ari(&run.result.labels, &self.truth).map_err(|e| e.to_string())?;
        Ok(vec![nmi, ari])
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        Demo {
            data: None,
            truth: Vec::new(),
            run: None,
        }
    }

    /// Generates a dataset; `kind` is "spirals5" or "blobs". Returns the
    /// point coordinates interleaved (x0, y0, x1, y1, ...) for drawing.
    /// Blobs are generated in 2-D so the page can plot them directly.
    pub fn generate(
        &mut self,
        kind: &str,
        n: u32,
        noise: f64,
        seed: u32,
    ) -> Result<Vec<f64>, JsValue> {
        self.generate_impl(kind, n as usize, noise, seed as u64)
            .map_err(|e| JsValue::from_str(&e))
    }

    /// Ground-truth labels of the generated dataset.
    pub fn truth_labels(&self) -> Vec<u32> {
        self.truth.clone()
    }

    /// Clusters the generated dataset; `clusters` = 0 selects the automatic
    /// potential-gap count. Returns the label per point.
    pub fn cluster(
        &mut self,
        kernel: &str,
        dc_percentile: f64,
        k: u32,
        clusters: u32,
        batch: u32,
    ) -> Result<Vec<u32>, JsValue> {
        self.cluster_impl(
            kernel,
            dc_percentile,
            k as usize,
            clusters as usize,
            batch as usize,
        )
        .map_err(|e| JsValue::from_str(&e))
    }

    /// Local densities from the last run.
    pub fn rho(&self) -> Vec<f64> {
        self.run
            .as_ref()
            .map(|r| r.rho.rho.clone())
            .unwrap_or_default()
    }

    /// Depending distances from the last run.
    pub fn delta(&self) -> Vec<f64> {
        self.run
            .as_ref()
            .map(|r| r.leading.delta.clone())
            .unwrap_or_default()
    }

    /// Center indices of the last run, in selection order.
    pub fn centers(&self) -> Vec<u32> {
        self.run
            .as_ref()
            .map(|r| r.result.centers.iter().map(|&c| c as u32).collect())
            .unwrap_or_default()
    }

    /// Run report of the last run as a JSON string.
    pub fn report(&self) -> String {
        self.run
            .as_ref()
            .and_then(|r| serde_json::to_string_pretty(&r.report).ok())
            .unwrap_or_else(|| "{}".to_string())
    }

    /// `[nmi, ari]` of the last run against the generator's ground truth.
    pub fn scores(&self) -> Result<Vec<f64>, JsValue> {
        self.scores_impl().map_err(|e| JsValue::from_str(&e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_then_cluster_recovers_spirals() {
        let mut demo = Demo::new();
        // The page's default size; small spirals get noisy densities, so
        // recovery is only near-perfect below a few thousand points.
        let coords = demo.generate_impl("spirals5", 4000, 0.05, 42).unwrap();
        assert_eq!(coords.len(), 8000);
        let labels = demo.cluster_impl("gaussian", 2.0, 16, 5, 256).unwrap();
        assert_eq!(labels.len(), 4000);
        let scores = demo.scores_impl().unwrap();
        assert!(scores[0] > 0.99, "nmi = {}", scores[0]);
        assert_eq!(demo.centers().len(), 5);
        assert_eq!(demo.rho().len(), 4000);
        let report: serde_json::Value = serde_json::from_str(&demo.report()).unwrap();
        assert_eq!(report["workers"], 1);
    }

    #[test]
    fn cluster_before_generate_fails() {
        let mut demo = Demo::new();
        assert!(demo.cluster_impl("gaussian", 2.0, 16, 5, 256).is_err());
    }

    #[test]
    fn unknown_kind_and_kernel_are_rejected() {
        let mut demo = Demo::new();
        assert!(demo.generate_impl("rings", 100, 0.0, 1).is_err());
        demo.generate_impl("blobs", 100, 0.05, 1).unwrap();
        assert!(demo.cluster_impl("triangle", 2.0, 8, 0, 64).is_err());
    }
}
