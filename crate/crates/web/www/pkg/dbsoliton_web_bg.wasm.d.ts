/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_fragmentationdemo_free: (a: number, b: number) => void;
export const __wbg_meanfielddemo_free: (a: number, b: number) => void;
export const fragmentationdemo_advance: (a: number, b: number) => [number, number];
export const fragmentationdemo_bright_density: (a: number) => [number, number];
export const fragmentationdemo_bright_occupations: (a: number) => [number, number];
export const fragmentationdemo_dark_density: (a: number) => [number, number];
export const fragmentationdemo_dark_occupations: (a: number) => [number, number];
export const fragmentationdemo_dimension: (a: number) => number;
export const fragmentationdemo_entropy: (a: number) => number;
export const fragmentationdemo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const fragmentationdemo_schmidt_weights: (a: number) => [number, number];
export const fragmentationdemo_time: (a: number) => number;
export const fragmentationdemo_x: (a: number) => [number, number];
export const meanfielddemo_advance: (a: number, b: number) => [number, number];
export const meanfielddemo_bright_density: (a: number) => [number, number];
export const meanfielddemo_dark_density: (a: number) => [number, number];
export const meanfielddemo_dark_minimum: (a: number) => number;
export const meanfielddemo_energy_drift: (a: number) => number;
export const meanfielddemo_eta: (a: number) => number;
export const meanfielddemo_mu: (a: number) => number;
export const meanfielddemo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const meanfielddemo_time: (a: number) => number;
export const meanfielddemo_width: (a: number) => number;
export const meanfielddemo_x: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
