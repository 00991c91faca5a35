/** Test fixtures: synthetic PPM frames with colored blocks plus a det file. */
import { mkdirSync, writeFileSync } from 'node:fs'
import { join } from 'node:path'
import { encodePpm, Image } from '../src/ppm.js'

export interface FixtureIdentity {
  color: [number, number, number]
  x: number
  y: number
  w: number
  h: number
  vx: number
}

export function makeFrame(
  width: number,
  height: number,
  identities: FixtureIdentity[],
  t: number,
): Image {
  const data = new Uint8Array(width * height * 3)
  data.fill(16) // dark background
  for (const id of identities) {
    const x0 = Math.max(0, Math.round(id.x + id.vx * t))
    for (let y = Math.max(0, id.y); y < Math.min(height, id.y + id.h); y++) {
      for (let x = x0; x < Math.min(width, x0 + id.w); x++) {
        const p = (y * width + x) * 3
        data[p] = id.color[0]
        data[p + 1] = id.color[1]
        data[p + 2] = id.color[2]
      }
    }
  }
  return { width, height, data }
}

export function writeCropSet(
  dir: string,
  opts: { frames: number; identities: FixtureIdentity[]; width?: number; height?: number },
): { framesDir: string; detFile: string; rows: number } {
  const width = opts.width ?? 320
  const height = opts.height ?? 240
  const framesDir = join(dir, 'img1')
  mkdirSync(framesDir, { recursive: true })
  const detLines: string[] = []
  for (let f = 1; f <= opts.frames; f++) {
    const img = makeFrame(width, height, opts.identities, f - 1)
    writeFileSync(join(framesDir, String(f).padStart(6, '0') + '.ppm'), encodePpm(img))
    for (const id of opts.identities) {
      const x = id.x + id.vx * (f - 1)
      detLines.push(`${f},-1,${x},${id.y},${id.w},${id.h},1.0,-1,-1`)
    }
  }
  const detFile = join(dir, 'det.txt')
  writeFileSync(detFile, detLines.join('\n') + '\n')
  return { framesDir, detFile, rows: detLines.length }
}

export const THREE_IDENTITIES: FixtureIdentity[] = [
  { color: [220, 40, 40], x: 20, y: 30, w: 30, h: 80, vx: 2 },
  { color: [40, 220, 40], x: 120, y: 60, w: 28, h: 70, vx: -1 },
  { color: [40, 40, 220], x: 220, y: 40, w: 32, h: 90, vx: 0.5 },
]
