/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_adrfield_free: (a: number, b: number) => void;
export const adrSolve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const adrfield_nt: (a: number) => number;
export const adrfield_nx: (a: number) => number;
export const adrfield_source: (a: number) => [number, number];
export const adrfield_values: (a: number) => [number, number];
export const grfSample: (a: number, b: number, c: number) => [number, number, number, number];
export const qLowerCurve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
