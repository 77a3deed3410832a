/* tslint:disable */
/* eslint-disable */

export class AdrField {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    nt(): number;
    nx(): number;
    /**
     * Forcing `f(x)` on the space grid.
     */
    source(): Float64Array;
    /**
     * `u(x_i, t_j)` at index `i * nt + j`.
     */
    values(): Float64Array;
}

export function adrSolve(length_scale: number, diffusion: number, reaction: number, nodes: number, seed: number): AdrField;

export function grfSample(length_scale: number, nodes: number, seed: number): Float64Array;

export function qLowerCurve(inputs_json: string, sigmoid: boolean, ns: Float64Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_adrfield_free: (a: number, b: number) => void;
    readonly adrSolve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly adrfield_nt: (a: number) => number;
    readonly adrfield_nx: (a: number) => number;
    readonly adrfield_source: (a: number) => [number, number];
    readonly adrfield_values: (a: number) => [number, number];
    readonly grfSample: (a: number, b: number, c: number) => [number, number, number, number];
    readonly qLowerCurve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
