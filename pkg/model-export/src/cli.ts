import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { CANONICAL_CLASS_ORDER, exportModel } from "./export";

async function run(): Promise<void> {
  await yargs(hideBin(process.argv))
    .command(
      "export",
      "assemble the classifier and export the ONNX model, manifest, and parity fixture",
      (cmd) =>
        cmd
          .option("weights", {
            type: "string",
            default: "imagenet-random-head",
            describe: 'weights bundle path, or "imagenet-random-head" for a seeded random network',
          })
          .option("out", { type: "string", default: "dist/model.onnx" })
          .option("fixture-out", { type: "string", describe: "directory for the parity fixture" })
          .option("class-order", {
            type: "string",
            describe: `comma-separated permutation of ${CANONICAL_CLASS_ORDER.join(",")}`,
          })
          .option("seed", { type: "number", default: 42 })
          .option("arch", {
            choices: ["inception-v3", "tiny"] as const,
            default: "inception-v3" as const,
            describe: "tiny builds a miniature net with the same op vocabulary (for tests)",
          }),
      async (argv) => {
        await exportModel({
          weights: argv.weights,
          out: argv.out,
          fixtureOut: argv["fixture-out"],
          classOrder: argv["class-order"] ? argv["class-order"].split(",") : undefined,
          seed: argv.seed,
          architecture: argv.arch,
          log: (message) => console.log(message),
        });
      },
    )
    .demandCommand(1)
    .strict()
    .fail((message, error) => {
      console.error(`error: ${message ?? error?.message}`);
      process.exit(1);
    })
    .parseAsync();
}

run().catch((error) => {
  console.error(`error: ${error?.message ?? error}`);
  process.exit(1);
});
