#!/usr/bin/env node
/**
 * gemb-export --frames DIR --det FILE --model REF --out FILE [--batch 32]
 *                                                            [--input 384x128]
 *
 * REF is `stub:constant[:dim]`, `stub:moments[:dim]`, or a path to a JS
 * module implementing the EmbeddingModel interface.
 */
import { parseArgs } from 'node:util'
import { pathToFileURL } from 'node:url'
import { loadModel } from './model.js'
import { runExport } from './export.js'

export async function main(argv: string[]): Promise<number> {
  let parsed
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        frames: { type: 'string' },
        det: { type: 'string' },
        model: { type: 'string' },
        out: { type: 'string' },
        batch: { type: 'string', default: '32' },
        input: { type: 'string', default: '384x128' },
      },
    })
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`)
    return 2
  }
  const { frames, det, model, out, batch, input } = parsed.values
  if (!frames || !det || !model || !out) {
    console.error('usage: gemb-export --frames DIR --det FILE --model REF --out FILE [--batch N] [--input HxW]')
    return 2
  }
  const batchSize = Number(batch)
  const sizeMatch = /^(\d+)x(\d+)$/.exec(input!)
  if (!Number.isInteger(batchSize) || batchSize < 1 || !sizeMatch) {
    console.error('usage error: --batch needs a positive integer, --input needs HxW')
    return 2
  }
  try {
    const summary = runExport({
      framesDir: frames,
      detFile: det,
      model: await loadModel(model),
      inputSize: [Number(sizeMatch[1]), Number(sizeMatch[2])],
      batchSize,
      outPath: out,
      log: (msg) => console.error(`warning: ${msg}`),
    })
    console.error(
      `wrote ${summary.written} embeddings over ${summary.frames} frames to ${out}` +
        (summary.skippedZeroArea ? ` (${summary.skippedZeroArea} zero-area crops skipped)` : ''),
    )
    return 0
  } catch (err) {
    console.error(`error: ${(err as Error).message}`)
    return 1
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  main(process.argv.slice(2)).then((code) => process.exit(code))
}
