/* tslint:disable */
/* eslint-disable */

/**
 * A scenario advanced one round per call.
 */
export class Stepper {
    free(): void;
    [Symbol.dispose](): void;
    finished(): boolean;
    /**
     * Which clients are malicious, as a JSON array of booleans.
     */
    malicious(): string;
    constructor(config_json: string);
    /**
     * JSON for the round just run, or `undefined` when finished.
     */
    step(): string | undefined;
    summary(): string;
    totalRounds(): number;
}

export function exploreController(history_json: string, start_acc: number, lambda: number, alpha: number, probe_json: string): string;

export function partitionPreview(num_classes: number, samples_per_class: number, num_clients: number, beta: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_stepper_free: (a: number, b: number) => void;
    readonly exploreController: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly partitionPreview: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly stepper_finished: (a: number) => number;
    readonly stepper_malicious: (a: number) => [number, number];
    readonly stepper_new: (a: number, b: number) => [number, number, number];
    readonly stepper_step: (a: number) => [number, number, number, number];
    readonly stepper_summary: (a: number) => [number, number];
    readonly stepper_totalRounds: (a: number) => number;
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
