/** Seeded PRNG so weight assembly and fixtures are fully reproducible. */

export type Rand = () => number;

/** mulberry32: fast 32-bit generator, uniform in [0, 1). */
export function mulberry32(seed: number): Rand {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Standard normal via Box-Muller on top of a uniform source. */
export function gaussian(rand: Rand): Rand {
  let spare: number | null = null;
  return () => {
    if (spare !== null) {
      const value = spare;
      spare = null;
      return value;
    }
    let u = 0;
    let v = 0;
    while (u === 0) u = rand();
    v = rand();
    const radius = Math.sqrt(-2.0 * Math.log(u));
    spare = radius * Math.sin(2.0 * Math.PI * v);
    return radius * Math.cos(2.0 * Math.PI * v);
  };
}

export function normalArray(rand: Rand, size: number, std: number): Float32Array {
  const gauss = gaussian(rand);
  const out = new Float32Array(size);
  for (let i = 0; i < size; i++) out[i] = gauss() * std;
  return out;
}

export function uniformArray(rand: Rand, size: number, low: number, high: number): Float32Array {
  const out = new Float32Array(size);
  for (let i = 0; i < size; i++) out[i] = low + (high - low) * rand();
  return out;
}
