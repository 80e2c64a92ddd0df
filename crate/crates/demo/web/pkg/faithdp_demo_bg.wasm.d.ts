/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_centers: (a: number) => [number, number];
export const demo_cluster: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const demo_delta: (a: number) => [number, number];
export const demo_generate: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const demo_new: () => number;
export const demo_report: (a: number) => [number, number];
export const demo_rho: (a: number) => [number, number];
export const demo_scores: (a: number) => [number, number, number, number];
export const demo_truth_labels: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
