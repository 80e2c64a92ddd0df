/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Center indices of the last run, in selection order.
     */
    centers(): Uint32Array;
    /**
     * Clusters the generated dataset; `clusters` = 0 selects the automatic
     * potential-gap count. Returns the label per point.
     */
    cluster(kernel: string, dc_percentile: number, k: number, clusters: number, batch: number): Uint32Array;
    /**
     * Depending distances from the last run.
     */
    delta(): Float64Array;
    /**
     * Generates a dataset; `kind` is "spirals5" or "blobs". Returns the
     * point coordinates interleaved (x0, y0, x1, y1, ...) for drawing.
     * Blobs are generated in 2-D so the page can plot them directly.
     */
    generate(kind: string, n: number, noise: number, seed: number): Float64Array;
    constructor();
    /**
     * Run report of the last run as a JSON string.
     */
    report(): string;
    /**
     * Local densities from the last run.
     */
    rho(): Float64Array;
    /**
     * `[nmi, ari]` of the last run against the generator's ground truth.
     */
    scores(): Float64Array;
    /**
     * Ground-truth labels of the generated dataset.
     */
    truth_labels(): Uint32Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_centers: (a: number) => [number, number];
    readonly demo_cluster: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly demo_delta: (a: number) => [number, number];
    readonly demo_generate: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly demo_new: () => number;
    readonly demo_report: (a: number) => [number, number];
    readonly demo_rho: (a: number) => [number, number];
    readonly demo_scores: (a: number) => [number, number, number, number];
    readonly demo_truth_labels: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
