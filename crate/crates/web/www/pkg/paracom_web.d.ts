/* tslint:disable */
/* eslint-disable */

/**
 * A patient unit's classifier fed from on-screen sliders at its native
 * sample rate.
 */
export class TiltPad {
    free(): void;
    [Symbol.dispose](): void;
    constructor();
    /**
     * Feed one sample and advance the clock by one period.
     */
    sample(pitch_deg: number, roll_deg: number): string;
    readonly period_ms: number;
}

export function demo_scenario(): string;

/**
 * Synthesize a 10 s PPG window at 100 Hz and estimate its rate.
 */
export function ppg(bpm: number, noise_amp: number, seed: number): string;

/**
 * Run a scenario script with default settings.
 */
export function run_scenario(text: string, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_tiltpad_free: (a: number, b: number) => void;
    readonly demo_scenario: () => [number, number];
    readonly ppg: (a: number, b: number, c: number) => [number, number];
    readonly run_scenario: (a: number, b: number, c: number) => [number, number];
    readonly tiltpad_new: () => number;
    readonly tiltpad_period_ms: (a: number) => number;
    readonly tiltpad_sample: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
