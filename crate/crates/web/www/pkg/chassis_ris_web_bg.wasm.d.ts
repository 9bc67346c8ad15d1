/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_analysis_free: (a: number, b: number) => void;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_survey_free: (a: number, b: number) => void;
export const analysis_cir_db: (a: number) => [number, number];
export const analysis_delay_spread_ns: (a: number) => number;
export const analysis_fom: (a: number) => number;
export const analysis_peak_ns: (a: number) => number;
export const analysis_spectrum_db: (a: number) => [number, number];
export const analysis_t_step_ns: (a: number) => number;
export const demo_analyze: (a: number, b: number) => [number, number, number];
export const demo_elements: (a: number) => number;
export const demo_frequencies_ghz: (a: number) => [number, number];
export const demo_new: (a: number, b: number, c: number) => [number, number, number];
export const demo_optimize: (a: number, b: number, c: number) => [number, number, number];
export const demo_survey: (a: number, b: number, c: number) => [number, number, number];
export const survey_std: (a: number) => [number, number];
export const survey_band_start_ghz: (a: number) => number;
export const survey_band_stop_ghz: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
