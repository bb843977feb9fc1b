/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curves_free: (a: number, b: number) => void;
export const __wbg_get_curves_exact: (a: number) => [number, number];
export const __wbg_get_curves_numeric: (a: number) => [number, number];
export const __wbg_get_curves_summary: (a: number) => [number, number];
export const __wbg_get_curves_x: (a: number) => [number, number];
export const __wbg_set_curves_exact: (a: number, b: number, c: number) => void;
export const __wbg_set_curves_numeric: (a: number, b: number, c: number) => void;
export const __wbg_set_curves_summary: (a: number, b: number, c: number) => void;
export const __wbg_set_curves_x: (a: number, b: number, c: number) => void;
export const checkConditions: (a: number, b: number, c: number) => [number, number, number];
export const reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const solveDirect: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
