/* tslint:disable */
/* eslint-disable */

export class Analysis {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * |h|^2 in dB from t = 0 to the cutoff.
     */
    readonly cir_db: Float64Array;
    readonly delay_spread_ns: number;
    readonly fom: number;
    readonly peak_ns: number;
    /**
     * |H|^2 in dB per grid point.
     */
    readonly spectrum_db: Float64Array;
    readonly t_step_ns: number;
}

/**
 * One simulated chassis on a fixed grid.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Spectrum, impulse response and figure of merit of one mask.
     */
    analyze(mask_index: number): Analysis;
    elements(): number;
    frequencies_ghz(): Float64Array;
    /**
     * Default cavity with `ris_elements` elements; `seed` places the
     * antennas at random when nonzero, otherwise the fixed positions are used.
     */
    constructor(ris_elements: number, seed: number, points: number);
    /**
     * Multi-start coordinate descent; returns the best mask index.
     */
    optimize(starts: number, seed: number): number;
    /**
     * Spread of |H| over `masks` random masks and the band it selects.
     */
    survey(masks: number, seed: number): Survey;
}

export class Survey {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly band_start_ghz: number;
    readonly band_stop_ghz: number;
    readonly std: Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_analysis_free: (a: number, b: number) => void;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_survey_free: (a: number, b: number) => void;
    readonly analysis_cir_db: (a: number) => [number, number];
    readonly analysis_delay_spread_ns: (a: number) => number;
    readonly analysis_fom: (a: number) => number;
    readonly analysis_peak_ns: (a: number) => number;
    readonly analysis_spectrum_db: (a: number) => [number, number];
    readonly analysis_t_step_ns: (a: number) => number;
    readonly demo_analyze: (a: number, b: number) => [number, number, number];
    readonly demo_elements: (a: number) => number;
    readonly demo_frequencies_ghz: (a: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_optimize: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_survey: (a: number, b: number, c: number) => [number, number, number];
    readonly survey_std: (a: number) => [number, number];
    readonly survey_band_start_ghz: (a: number) => number;
    readonly survey_band_stop_ghz: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
