/* tslint:disable */
/* eslint-disable */

/**
 * Exact few-body analogue: a small-N imprint embedded in `M` natural modes
 * per species and propagated with Lanczos steps.
 */
export class FragmentationDemo {
    free(): void;
    [Symbol.dispose](): void;
    advance(duration: number): void;
    bright_density(): Float64Array;
    bright_occupations(): Float64Array;
    dark_density(): Float64Array;
    /**
     * Natural occupations of the dark component, largest first.
     */
    dark_occupations(): Float64Array;
    dimension(): number;
    entropy(): number;
    constructor(n_dark: number, n_bright: number, velocity: number, modes: number, g_db: number);
    /**
     * Schmidt weights, largest first.
     */
    schmidt_weights(): Float64Array;
    time(): number;
    x(): Float64Array;
}

/**
 * Imprinted dark-bright soliton(s) evolved with the coupled GP equations.
 */
export class MeanFieldDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Advance by (approximately) `duration`, in whole steps of 10⁻³.
     */
    advance(duration: number): void;
    bright_density(): Float64Array;
    dark_density(): Float64Array;
    /**
     * Tracked position of the first dark minimum.
     */
    dark_minimum(): number;
    energy_drift(): number;
    eta(): number;
    mu(): number;
    /**
     * Solve the trapped imprint on the 1200-point box `[-60, 60]`.
     */
    constructor(n_dark: number, n_bright: number, velocity: number, x0: number, pair: boolean);
    time(): number;
    width(): number;
    x(): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_fragmentationdemo_free: (a: number, b: number) => void;
    readonly __wbg_meanfielddemo_free: (a: number, b: number) => void;
    readonly fragmentationdemo_advance: (a: number, b: number) => [number, number];
    readonly fragmentationdemo_bright_density: (a: number) => [number, number];
    readonly fragmentationdemo_bright_occupations: (a: number) => [number, number];
    readonly fragmentationdemo_dark_density: (a: number) => [number, number];
    readonly fragmentationdemo_dark_occupations: (a: number) => [number, number];
    readonly fragmentationdemo_dimension: (a: number) => number;
    readonly fragmentationdemo_entropy: (a: number) => number;
    readonly fragmentationdemo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly fragmentationdemo_schmidt_weights: (a: number) => [number, number];
    readonly fragmentationdemo_time: (a: number) => number;
    readonly fragmentationdemo_x: (a: number) => [number, number];
    readonly meanfielddemo_advance: (a: number, b: number) => [number, number];
    readonly meanfielddemo_bright_density: (a: number) => [number, number];
    readonly meanfielddemo_dark_density: (a: number) => [number, number];
    readonly meanfielddemo_dark_minimum: (a: number) => number;
    readonly meanfielddemo_energy_drift: (a: number) => number;
    readonly meanfielddemo_eta: (a: number) => number;
    readonly meanfielddemo_mu: (a: number) => number;
    readonly meanfielddemo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly meanfielddemo_time: (a: number) => number;
    readonly meanfielddemo_width: (a: number) => number;
    readonly meanfielddemo_x: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
