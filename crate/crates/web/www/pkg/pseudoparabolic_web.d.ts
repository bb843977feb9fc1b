/* tslint:disable */
/* eslint-disable */

/**
 * One plotted curve pair plus a summary line.
 */
export class Curves {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Exact values at `x`; empty when there are none.
     */
    exact: Float64Array;
    numeric: Float64Array;
    summary: string;
    /**
     * Abscissae: times or nodes.
     */
    x: Float64Array;
}

export function checkConditions(_case: string, n: number): Curves;

export function reconstruct(_case: string, scheme: string, n: number, noise: number, seed: number): Curves;

export function solveDirect(_case: string, scheme: string, n: number): Curves;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curves_free: (a: number, b: number) => void;
    readonly __wbg_get_curves_exact: (a: number) => [number, number];
    readonly __wbg_get_curves_numeric: (a: number) => [number, number];
    readonly __wbg_get_curves_summary: (a: number) => [number, number];
    readonly __wbg_get_curves_x: (a: number) => [number, number];
    readonly __wbg_set_curves_exact: (a: number, b: number, c: number) => void;
    readonly __wbg_set_curves_numeric: (a: number, b: number, c: number) => void;
    readonly __wbg_set_curves_summary: (a: number, b: number, c: number) => void;
    readonly __wbg_set_curves_x: (a: number, b: number, c: number) => void;
    readonly checkConditions: (a: number, b: number, c: number) => [number, number, number];
    readonly reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly solveDirect: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
