/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_stepper_free: (a: number, b: number) => void;
export const exploreController: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const partitionPreview: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const stepper_finished: (a: number) => number;
export const stepper_malicious: (a: number) => [number, number];
export const stepper_new: (a: number, b: number) => [number, number, number];
export const stepper_step: (a: number) => [number, number, number, number];
export const stepper_summary: (a: number) => [number, number];
export const stepper_totalRounds: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
