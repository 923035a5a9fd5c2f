/* tslint:disable */
/* eslint-disable */

/**
 * Ball sizes, ratio jumps and the fitted growth exponent.
 */
export function growth_curve(group: string, radius: number): string;

/**
 * The truncated length function and its sublevel counting function.
 */
export function length_profile(group: string, radius: number, d_target: number, beta: number, gamma: number, depth: number): string;

/**
 * `|sB_k ∩ B_k| / |B_k|` for an element written like `(1,-2,0)`.
 */
export function overlap(group: string, radius: number, k: number, element: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly growth_curve: (a: number, b: number, c: number) => [number, number];
    readonly length_profile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly overlap: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
