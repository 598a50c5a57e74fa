/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_tiltpad_free: (a: number, b: number) => void;
export const demo_scenario: () => [number, number];
export const ppg: (a: number, b: number, c: number) => [number, number];
export const run_scenario: (a: number, b: number, c: number) => [number, number];
export const tiltpad_new: () => number;
export const tiltpad_period_ms: (a: number) => number;
export const tiltpad_sample: (a: number, b: number, c: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
